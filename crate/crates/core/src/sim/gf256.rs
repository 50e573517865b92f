//! GF(2^8) arithmetic over x^8 + x^4 + x^3 + x^2 + 1 and a systematic
//! Reed-Solomon erasure code built from a normalized Vandermonde matrix.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const POLY: u16 = 0x11D;

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut exp = [0u8; 512];
        let mut log = [0u8; 256];
        let mut x: u16 = 1;
        for i in 0..255 {
            exp[i] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & 0x100 != 0 {
                x ^= POLY;
            }
        }
        for i in 255..512 {
            exp[i] = exp[i - 255];
        }
        Tables { exp, log }
    })
}

#[inline]
pub fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    let t = tables();
    t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
}

pub fn inv(a: u8) -> u8 {
    assert!(a != 0, "zero has no inverse");
    let t = tables();
    t.exp[255 - t.log[a as usize] as usize]
}

fn pow(a: u8, e: usize) -> u8 {
    (0..e).fold(1, |acc, _| mul(acc, a))
}

type Matrix = Vec<Vec<u8>>;

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let cols = b[0].len();
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| row.iter().zip(b).fold(0u8, |acc, (&x, brow)| acc ^ mul(x, brow[c])))
                .collect()
        })
        .collect()
}

/// Gauss-Jordan inverse of a square matrix.
fn mat_inv(m: &Matrix) -> Option<Matrix> {
    let k = m.len();
    let mut a: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| (i == j) as u8));
            r
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k).find(|&r| a[r][col] != 0)?;
        a.swap(col, pivot);
        let p = inv(a[col][col]);
        for v in a[col].iter_mut() {
            *v = mul(*v, p);
        }
        for r in 0..k {
            if r != col && a[r][col] != 0 {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                    *v ^= mul(f, pv);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[k..].to_vec()).collect())
}

/// Systematic `(n, k)` code: shards `0..k` are the data, any `k` of the `n`
/// shards recover everything.
#[derive(Debug, Clone)]
pub struct ReedSolomon {
    n: usize,
    k: usize,
    /// `n x k` generator whose top `k` rows are the identity.
    generator: Matrix,
}

impl ReedSolomon {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n || n > 255 {
            return Err(Error::ConfigInfeasible(format!("no ({n}, {k}) code over GF(256)")));
        }
        let vandermonde: Matrix = (0..n).map(|r| (0..k).map(|c| pow(r as u8, c)).collect()).collect();
        let top_inv = mat_inv(&vandermonde[..k].to_vec()).expect("Vandermonde rows are independent");
        Ok(Self { n, k, generator: mat_mul(&vandermonde, &top_inv) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Length of each shard for a message of `len` bytes.
    pub fn shard_len(&self, len: usize) -> usize {
        len.div_ceil(self.k)
    }

    /// Splits `data` (zero padded) into `k` data shards and appends `n - k`
    /// parity shards.
    pub fn encode(&self, data: &[u8]) -> Vec<Vec<u8>> {
        let len = self.shard_len(data.len());
        let mut shards: Vec<Vec<u8>> = (0..self.k)
            .map(|i| {
                let mut s = data.get(i * len..((i + 1) * len).min(data.len())).unwrap_or(&[]).to_vec();
                s.resize(len, 0);
                s
            })
            .collect();
        for row in &self.generator[self.k..] {
            shards.push(Self::combine(row, &shards[..self.k], len));
        }
        shards
    }

    fn combine(row: &[u8], shards: &[Vec<u8>], len: usize) -> Vec<u8> {
        let mut out = vec![0u8; len];
        for (&c, shard) in row.iter().zip(shards) {
            if c == 0 {
                continue;
            }
            for (o, &s) in out.iter_mut().zip(shard) {
                *o ^= mul(c, s);
            }
        }
        out
    }

    /// Data shards from any `k` available `(index, shard)` pairs.
    fn data_shards(&self, available: &[(usize, &[u8])]) -> Result<Vec<Vec<u8>>> {
        if available.len() < self.k {
            return Err(Error::Decode(format!("{} shards available, {} needed", available.len(), self.k)));
        }
        let chosen = &available[..self.k];
        let len = chosen[0].1.len();
        if chosen.iter().any(|(i, s)| *i >= self.n || s.len() != len) {
            return Err(Error::Decode("inconsistent shards".into()));
        }
        let sub: Matrix = chosen.iter().map(|(i, _)| self.generator[*i].clone()).collect();
        let decode = mat_inv(&sub).ok_or_else(|| Error::Decode("repeated shard index".into()))?;
        let owned: Vec<Vec<u8>> = chosen.iter().map(|(_, s)| s.to_vec()).collect();
        Ok(decode.iter().map(|row| Self::combine(row, &owned, len)).collect())
    }

    /// Recovers the original message of `len` bytes.
    pub fn decode(&self, available: &[(usize, &[u8])], len: usize) -> Result<Vec<u8>> {
        let mut data: Vec<u8> = self.data_shards(available)?.concat();
        if data.len() < len {
            return Err(Error::Decode("shards too short".into()));
        }
        data.truncate(len);
        Ok(data)
    }

    /// Rebuilds shard `index` from any `k` others.
    pub fn reconstruct(&self, available: &[(usize, &[u8])], index: usize) -> Result<Vec<u8>> {
        if index >= self.n {
            return Err(Error::Decode(format!("shard {index} out of range")));
        }
        let data = self.data_shards(available)?;
        let len = data.first().map_or(0, |s| s.len());
        Ok(Self::combine(&self.generator[index], &data, len))
    }
}

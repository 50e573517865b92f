//! Entropy coding of dithered quantizer indices under the exact Gaussian
//! posterior: the source is known to lie in an interval (from other,
//! already decoded quantizers), and each candidate index gets the standard
//! normal mass of its cell within that interval.

use super::gauss::{cdf_with, tail_table, TAIL_LIMIT};
use super::rangecoder::{Decoder, Encoder, TOTAL};
use crate::error::{Error, Result};

/// Widening applied to conditioning intervals against rounding at cell edges.
const EDGE_SLACK: f64 = 1e-9;
const MAX_SUPPORT: usize = 4096;

/// `f64::floor` is a library call on baseline x86-64.
#[inline]
fn floor(y: f64) -> i64 {
    let i = y as i64;
    i - ((i as f64) > y) as i64
}

/// Uniform scalar quantizer with subtractive dither.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub step: f64,
    inv_step: f64,
}

impl Lattice {
    pub fn new(step: f64) -> Self {
        Self { step, inv_step: 1.0 / step }
    }

    /// Step whose uniform error has variance `noise_var`.
    pub fn for_noise_variance(noise_var: f64) -> Self {
        Self::new((12.0 * noise_var).sqrt())
    }

    #[inline]
    pub fn index(&self, x: f64, dither: f64) -> i64 {
        floor((x + dither) * self.inv_step + 0.5)
    }

    #[inline]
    pub fn reconstruct(&self, index: i64, dither: f64) -> f64 {
        index as f64 * self.step - dither
    }

    /// Source values mapped to `index`: `[lo, hi)`.
    #[inline]
    pub fn cell(&self, index: i64, dither: f64) -> (f64, f64) {
        let c = index as f64;
        ((c - 0.5) * self.step - dither, (c + 0.5) * self.step - dither)
    }
}

/// Cumulative frequencies over the indices whose cells meet an interval.
///
/// Boundary `j` gets `j + floor(F_j (TOTAL - k))`, where `F_j` is the
/// conditional distribution function at the upper edge of the `j`-th cell,
/// so every index has frequency at least one and any single entry costs two
/// distribution function evaluations.
struct Table {
    cdf: &'static [f64],
    lat: Lattice,
    dither: f64,
    first: i64,
    k: usize,
    c_lo: f64,
    scale: f64,
}

impl Table {
    fn new(lat: Lattice, dither: f64, lo: f64, hi: f64) -> Result<Self> {
        let lo = (lo - EDGE_SLACK).max(-TAIL_LIMIT);
        let hi = (hi + EDGE_SLACK).min(TAIL_LIMIT);
        if !(lo <= hi) {
            return Err(Error::Decode(format!("empty conditioning interval [{lo}, {hi}]")));
        }
        let first = lat.index(lo, dither);
        let k = (lat.index(hi, dither) - first + 1) as usize;
        if k > MAX_SUPPORT {
            return Err(Error::ConfigInfeasible(format!("quantizer step {} too fine to code", lat.step)));
        }
        let spare = (TOTAL as usize - k) as f64;
        let cdf = tail_table();
        let (c_lo, scale) = if k == 1 {
            (0.0, 0.0)
        } else {
            let c_lo = cdf_with(cdf, lo);
            let total = cdf_with(cdf, hi) - c_lo;
            (c_lo, if total > 0.0 { spare / total } else { 0.0 })
        };
        Ok(Self { cdf, lat, dither, first, k, c_lo, scale })
    }

    #[inline]
    fn boundary(&self, j: usize) -> u32 {
        if j == 0 {
            return 0;
        }
        if j == self.k {
            return TOTAL;
        }
        // Interior edges lie inside [lo, hi]; the cast saturates at zero and
        // the scaled value cannot exceed the spare count by a whole unit.
        let edge = self.lat.cell(self.first + j as i64 - 1, self.dither).1;
        let g = (cdf_with(self.cdf, edge) - self.c_lo) * self.scale;
        j as u32 + g as u32
    }
}

/// Codes `indices[j]` given that the source lies in `interval(j)`.
pub fn encode_stream(
    lat: Lattice,
    dither: &[f64],
    indices: &[i64],
    interval: impl Fn(usize) -> (f64, f64),
) -> Result<Vec<u8>> {
    let mut enc = Encoder::new();
    for (j, &index) in indices.iter().enumerate() {
        let (lo, hi) = interval(j);
        let table = Table::new(lat, dither[j], lo, hi)?;
        let s = index - table.first;
        if s < 0 || s as usize >= table.k {
            return Err(Error::Decode(format!("index {index} outside its conditioning interval")));
        }
        let (a, b) = (table.boundary(s as usize), table.boundary(s as usize + 1));
        enc.encode(a, b - a);
    }
    Ok(enc.finish())
}

/// Inverse of [`encode_stream`] for `len` symbols.
pub fn decode_stream(
    lat: Lattice,
    dither: &[f64],
    len: usize,
    interval: impl Fn(usize) -> (f64, f64),
    bytes: &[u8],
) -> Result<Vec<i64>> {
    let mut dec = Decoder::new(bytes);
    let mut out = Vec::with_capacity(len);
    for j in 0..len {
        let (lo, hi) = interval(j);
        let table = Table::new(lat, dither[j], lo, hi)?;
        let (t, r) = dec.target();
        // Largest s with boundary(s) <= t, using selects since the direction
        // is unpredictable.
        let (mut a, mut b) = (0usize, table.k);
        let (mut ca, mut cb) = (0u32, TOTAL);
        while b - a > 1 {
            let mid = (a + b) / 2;
            let c = table.boundary(mid);
            let right = c <= t;
            a = if right { mid } else { a };
            ca = if right { c } else { ca };
            b = if right { b } else { mid };
            cb = if right { cb } else { c };
        }
        dec.consume(r, ca, cb - ca);
        out.push(table.first + a as i64);
    }
    if dec.overran() {
        return Err(Error::Decode("stream ended early".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn indices_round_trip_and_cost_about_the_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coarse = Lattice::for_noise_variance(2.0);
        let fine = Lattice::for_noise_variance(0.1);
        let n = 50_000;
        let (mut dc, mut df, mut ic, mut fi) = (vec![], vec![], vec![], vec![]);
        for _ in 0..n {
            let x: f64 = rng.sample(StandardNormal);
            dc.push(rng.random_range(-0.5..0.5) * coarse.step);
            df.push(rng.random_range(-0.5..0.5) * fine.step);
            ic.push(coarse.index(x, *dc.last().unwrap()));
            fi.push(fine.index(x, *df.last().unwrap()));
        }
        let interval = |j: usize| coarse.cell(ic[j], dc[j]);
        let bytes = encode_stream(fine, &df, &fi, interval).unwrap();
        assert_eq!(decode_stream(fine, &df, n, interval, &bytes).unwrap(), fi);
        assert!(decode_stream(fine, &df, n, interval, &bytes[..bytes.len() / 2]).is_err());
        // I(X; fine | coarse) with Gaussian noises is an upper-bound proxy
        // for the conditional index entropy under subtractive dither.
        let bits = bytes.len() as f64 * 8.0 / n as f64;
        let info = 0.5 * ((1.0f64 + 1.0 / 2.0 + 1.0 / 0.1) / (1.0 + 1.0 / 2.0)).log2();
        assert!(bits > info - 0.1 && bits < info + 0.4, "{bits} vs {info}");
    }

    #[test]
    fn index_outside_interval_is_rejected() {
        let lat = Lattice::new(1.0);
        assert!(encode_stream(lat, &[0.0], &[3], |_| (-0.4, 0.4)).is_err());
    }

    #[test]
    fn lattice_cells_contain_their_points() {
        let lat = Lattice::new(0.7);
        for i in 0..1000 {
            let x = -5.0 + i as f64 * 0.01;
            let d = 0.123;
            let (lo, hi) = lat.cell(lat.index(x, d), d);
            assert!(lo - 1e-12 <= x && x < hi + 1e-12);
            assert!((lat.reconstruct(lat.index(x, d), d) - x).abs() <= lat.step / 2.0 + 1e-12);
        }
    }
}

//! Node contents, encoding, subset decoding and exact repair.
//!
//! Every node stores the same common description, its own private
//! description coded given the common cell, a repair stream and a share of
//! the top description. Node `i` keeps the repair stream of node `i + 1`
//! (cyclically): the private index of that node coded given the common cell
//! and the private cells of all other nodes. The top description is coded
//! given every private cell and split into `(n, n - 1)` Reed-Solomon shares,
//! or into two halves plus their XOR for two nodes.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::gf256::ReedSolomon;
use super::gauss::TAIL_LIMIT;
use super::model::{self, Lattice};
use crate::closed_form::two_node_optimal;
use crate::error::{Error, Result};
use crate::explorer::{three_node_optimal, OptimizerConfig};
use crate::types::{ChannelParams, DistortionSpec};

pub const DEFAULT_OVERHEAD_BITS: f64 = 0.5;

/// Space-filling loss of a uniform scalar quantizer relative to a Gaussian
/// test channel of equal rate.
const SCALAR_LOSS: f64 = std::f64::consts::PI * std::f64::consts::E / 6.0;

const MAX_CELLS: f64 = 4000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub spec: DistortionSpec,
    pub params: ChannelParams,
    pub block_len: usize,
    pub seed: u64,
    pub quantizer_overhead_bits: f64,
}

impl SimConfig {
    pub fn new(spec: DistortionSpec, params: ChannelParams, block_len: usize, seed: u64) -> Self {
        Self { n: params.n, spec, params, block_len, seed, quantizer_overhead_bits: DEFAULT_OVERHEAD_BITS }
    }

    /// Configuration with the optimal test channel for `spec`.
    pub fn for_spec(n: usize, spec: DistortionSpec, block_len: usize, seed: u64) -> Result<Self> {
        let point = match n {
            2 => two_node_optimal(&spec)?,
            3 => three_node_optimal(&spec, &OptimizerConfig::default())?,
            _ => return Err(Error::ConfigInfeasible(format!("no single-layer scheme for n = {n}"))),
        };
        let params = point.params.ok_or(Error::NoFeasiblePoint)?;
        Ok(Self::new(spec, params, block_len, seed))
    }

    pub fn with_overhead(mut self, bits: f64) -> Self {
        self.quantizer_overhead_bits = bits;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.params.validate()?;
        if self.n < 2 || self.params.n != self.n {
            return Err(Error::InvalidParameters(format!("n = {} with parameters for n = {}", self.n, self.params.n)));
        }
        if self.block_len == 0 {
            return Err(Error::InvalidParameters("block_len must be at least 1".into()));
        }
        if !(self.quantizer_overhead_bits > 0.0 && self.quantizer_overhead_bits.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "quantizer_overhead_bits = {}",
                self.quantizer_overhead_bits
            )));
        }
        if self.n > 3 || self.params.layers.len() != 1 {
            return Err(Error::ConfigInfeasible(format!(
                "simulator handles one common/private layer (n = 2 or 3), got n = {} with {} layers",
                self.n,
                self.params.layers.len()
            )));
        }
        Ok(())
    }

    /// Ratio of quantization noise variance to test-channel noise variance.
    pub fn noise_scale(&self) -> f64 {
        SCALAR_LOSS.min(4f64.powf(self.quantizer_overhead_bits))
    }

    /// Smallest subset size that reads the top description.
    pub fn top_subset_size(&self) -> usize {
        (self.n - 1).max(2)
    }
}

/// What one node stores for one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeContent {
    /// 1-based.
    pub node: usize,
    pub block: u64,
    pub common: Vec<u8>,
    pub private: Vec<u8>,
    pub top_share: Vec<u8>,
    /// XOR of the two top halves (two nodes only).
    pub top_parity: Vec<u8>,
    /// Length of the full top stream.
    pub top_len: u32,
    /// Repair stream for the next node.
    pub repair_share: Vec<u8>,
}

impl NodeContent {
    const HEADER: usize = 2 + 8 + 4;

    /// Big-endian header, then length-prefixed sections in storage order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let sections = [&self.common, &self.private, &self.top_share, &self.top_parity, &self.repair_share];
        let mut out = Vec::with_capacity(Self::HEADER + sections.iter().map(|s| 4 + s.len()).sum::<usize>());
        out.extend_from_slice(&(self.node as u16).to_be_bytes());
        out.extend_from_slice(&self.block.to_be_bytes());
        out.extend_from_slice(&self.top_len.to_be_bytes());
        for s in sections {
            out.extend_from_slice(&(s.len() as u32).to_be_bytes());
            out.extend_from_slice(s);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut rest = bytes;
        let mut take = |k: usize| -> Result<&[u8]> {
            if rest.len() < k {
                return Err(Error::Decode("truncated node content".into()));
            }
            let (head, tail) = rest.split_at(k);
            rest = tail;
            Ok(head)
        };
        let node = u16::from_be_bytes(take(2)?.try_into().unwrap()) as usize;
        let block = u64::from_be_bytes(take(8)?.try_into().unwrap());
        let top_len = u32::from_be_bytes(take(4)?.try_into().unwrap());
        let mut section = || -> Result<Vec<u8>> {
            let len = u32::from_be_bytes(take(4)?.try_into().unwrap()) as usize;
            Ok(take(len)?.to_vec())
        };
        let content = Self {
            node,
            block,
            top_len,
            common: section()?,
            private: section()?,
            top_share: section()?,
            top_parity: section()?,
            repair_share: section()?,
        };
        if !rest.is_empty() {
            return Err(Error::Decode("trailing bytes after node content".into()));
        }
        Ok(content)
    }

    pub fn stored_bits(&self) -> usize {
        8 * (Self::HEADER
            + 20
            + self.common.len()
            + self.private.len()
            + self.top_share.len()
            + self.top_parity.len()
            + self.repair_share.len())
    }
}

/// Dither streams for one block.
#[derive(Debug, Clone)]
pub struct Dithers {
    common: Vec<f64>,
    private: Vec<Vec<f64>>,
    top: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Obs {
    Common,
    Private(usize),
    Top,
}

/// Quantizer indices known to a decoder; private entries are 0-based by node.
#[derive(Debug, Clone)]
pub(crate) struct Indices {
    pub common: Option<Vec<i64>>,
    pub private: Vec<Option<Vec<i64>>>,
    pub top: Option<Vec<i64>>,
}

/// Dequantized descriptions.
#[derive(Debug, Clone)]
pub(crate) struct Reconstructions {
    pub common: Option<Vec<f64>>,
    pub private: Vec<Option<Vec<f64>>>,
    pub top: Option<Vec<f64>>,
}

/// Known side information for coding one stream: the common indices and any
/// number of private index streams.
struct Side<'a> {
    common: Option<&'a [i64]>,
    private: Vec<(&'a [i64], &'a [f64])>,
}

pub struct Simulator {
    cfg: SimConfig,
    common: Option<Lattice>,
    private: Option<Lattice>,
    top: Option<Lattice>,
    spread_prob: f64,
    rs: Option<ReedSolomon>,
    /// LMMSE weights by subset bit mask.
    weights: Vec<Vec<(Obs, f64)>>,
}

fn lattice(noise_var: f64, scale: f64, what: &str) -> Result<Option<Lattice>> {
    if noise_var.is_infinite() {
        return Ok(None);
    }
    let lat = Lattice::for_noise_variance(noise_var * scale);
    if !(lat.step * MAX_CELLS >= 2.0 * TAIL_LIMIT) {
        return Err(Error::ConfigInfeasible(format!("{what} quantizer step {} is too fine", lat.step)));
    }
    Ok(Some(lat))
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n;
        let scale = cfg.noise_scale();
        let layer = &cfg.params.layers[0];
        let common = lattice(layer.sigma_u_sq, scale, "common")?;
        let private = lattice(layer.sigma_q_sq, scale, "private")?;
        let top = lattice(cfg.params.top_sigma_sq, scale, "top")?;
        if common.is_none() && private.is_none() && top.is_none() {
            return Err(Error::ConfigInfeasible("nothing to store".into()));
        }
        if top.is_some() && private.is_none() {
            return Err(Error::ConfigInfeasible("top description without private descriptions".into()));
        }
        // Offsets spread over the cell give pairwise error correlation -1/n,
        // equal offsets give 1; mixing the two reaches anything in between.
        let lowest = -1.0 / n as f64;
        let rho = layer.rho;
        if private.is_some() && rho < lowest - 1e-12 {
            return Err(Error::ConfigInfeasible(format!(
                "private noise correlation {rho} below {lowest}, the lowest dithering can realize"
            )));
        }
        let spread_prob = ((1.0 - rho) / (1.0 - lowest)).clamp(0.0, 1.0);
        let rs = if top.is_some() && n >= 3 { Some(ReedSolomon::new(n, n - 1)?) } else { None };
        let mut sim = Self { cfg, common, private, top, spread_prob, rs, weights: Vec::new() };
        sim.weights = (0..1usize << n).map(|mask| sim.lmmse_weights(mask)).collect::<Result<_>>()?;
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn n(&self) -> usize {
        self.cfg.n
    }

    fn observations(&self, mask: usize) -> Vec<Obs> {
        let mut obs = Vec::new();
        if mask == 0 {
            return obs;
        }
        if self.common.is_some() {
            obs.push(Obs::Common);
        }
        if self.private.is_some() {
            obs.extend((0..self.n()).filter(|i| mask >> i & 1 == 1).map(Obs::Private));
        }
        if self.top.is_some() && mask.count_ones() as usize >= self.cfg.top_subset_size() {
            obs.push(Obs::Top);
        }
        obs
    }

    /// Weights minimizing the mean squared error under the model scaled to
    /// the actual quantization noise.
    fn lmmse_weights(&self, mask: usize) -> Result<Vec<(Obs, f64)>> {
        let obs = self.observations(mask);
        if obs.is_empty() {
            return Ok(Vec::new());
        }
        let scale = self.cfg.noise_scale();
        let layer = &self.cfg.params.layers[0];
        let noise = |o: Obs| match o {
            Obs::Common => layer.sigma_u_sq,
            Obs::Private(_) => layer.sigma_q_sq,
            Obs::Top => self.cfg.params.top_sigma_sq,
        } * scale;
        let m = obs.len();
        let cov = DMatrix::from_fn(m, m, |a, b| match (obs[a], obs[b]) {
            _ if a == b => 1.0 + noise(obs[a]),
            (Obs::Private(_), Obs::Private(_)) => 1.0 + layer.rho * noise(obs[a]),
            _ => 1.0,
        });
        let rhs = DVector::from_element(m, 1.0);
        let w = match cov.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => cov
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .map_err(|e| Error::ConfigInfeasible(format!("estimator weights: {e}")))?,
        };
        Ok(obs.into_iter().zip(w.iter().copied()).collect())
    }

    /// Dithers for `block`, derived from the seed.
    pub fn dithers(&self, block: u64) -> Dithers {
        let n = self.n();
        let len = self.cfg.block_len;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(2 * block + 1);
        let uniform = |lat: Option<Lattice>, rng: &mut ChaCha8Rng| match lat {
            Some(l) => (0..len).map(|_| (rng.random::<f64>() - 0.5) * l.step).collect(),
            None => Vec::new(),
        };
        let common = uniform(self.common, &mut rng);
        let top = uniform(self.top, &mut rng);
        let mut private = vec![Vec::new(); n];
        if let Some(lat) = self.private {
            for p in &mut private {
                p.reserve_exact(len);
            }
            let mut perm: Vec<usize> = (0..n).collect();
            for _ in 0..len {
                let base = (rng.random::<f64>() - 0.5) * lat.step;
                if rng.random::<f64>() < self.spread_prob {
                    perm.shuffle(&mut rng);
                    for (p, &k) in private.iter_mut().zip(&perm) {
                        p.push(base + k as f64 * lat.step / n as f64);
                    }
                } else {
                    for p in &mut private {
                        p.push(base);
                    }
                }
            }
        }
        Dithers { common, private, top }
    }

    fn cells(&self, side: &Side<'_>, dith: &Dithers, j: usize) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        if let (Some(idx), Some(lat)) = (side.common, self.common) {
            (lo, hi) = lat.cell(idx[j], dith.common[j]);
        }
        if let Some(lat) = self.private {
            for (idx, d) in &side.private {
                let (a, b) = lat.cell(idx[j], d[j]);
                lo = lo.max(a);
                hi = hi.min(b);
            }
        }
        (lo, hi)
    }

    fn encode_stream(&self, lat: Lattice, dither: &[f64], indices: &[i64], side: &Side<'_>, dith: &Dithers) -> Result<Vec<u8>> {
        model::encode_stream(lat, dither, indices, |j| self.cells(side, dith, j))
    }

    fn decode_stream(&self, lat: Lattice, dither: &[f64], bytes: &[u8], side: &Side<'_>, dith: &Dithers) -> Result<Vec<i64>> {
        model::decode_stream(lat, dither, self.cfg.block_len, |j| self.cells(side, dith, j), bytes)
    }

    fn side<'a>(&self, idx: &'a Indices, dith: &'a Dithers, nodes: impl Iterator<Item = usize>) -> Result<Side<'a>> {
        let private = nodes
            .map(|i| {
                idx.private[i]
                    .as_deref()
                    .map(|p| (p, dith.private[i].as_slice()))
                    .ok_or_else(|| Error::Decode(format!("private description of node {} unknown", i + 1)))
            })
            .collect::<Result<_>>()?;
        Ok(Side { common: idx.common.as_deref(), private })
    }

    fn others(&self, i: usize) -> impl Iterator<Item = usize> {
        (0..self.n()).filter(move |&k| k != i)
    }

    /// 0-based node holding the repair stream of node `i`.
    fn repair_holder(&self, i: usize) -> usize {
        (i + self.n() - 1) % self.n()
    }

    fn encode_private(&self, i: usize, idx: &Indices, dith: &Dithers) -> Result<Vec<u8>> {
        let (Some(lat), Some(p)) = (self.private, &idx.private[i]) else { return Ok(Vec::new()) };
        self.encode_stream(lat, &dith.private[i], p, &self.side(idx, dith, std::iter::empty())?, dith)
    }

    fn encode_repair(&self, i: usize, idx: &Indices, dith: &Dithers) -> Result<Vec<u8>> {
        let (Some(lat), Some(p)) = (self.private, &idx.private[i]) else { return Ok(Vec::new()) };
        self.encode_stream(lat, &dith.private[i], p, &self.side(idx, dith, self.others(i))?, dith)
    }

    fn split_top(&self, top: &[u8]) -> (Vec<Vec<u8>>, Vec<u8>) {
        match &self.rs {
            Some(rs) => (rs.encode(top), Vec::new()),
            None => {
                let half = top.len().div_ceil(2);
                let mut a = top[..half].to_vec();
                let mut b = top[half..].to_vec();
                a.resize(half, 0);
                b.resize(half, 0);
                let parity = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
                (vec![a, b], parity)
            }
        }
    }

    /// Quantizes `source` and builds the content of every node.
    pub fn encode_block(&self, source: &[f64], block: u64) -> Result<Vec<NodeContent>> {
        self.encode_with(source, block, &self.dithers(block))
    }

    pub(crate) fn encode_with(&self, source: &[f64], block: u64, dith: &Dithers) -> Result<Vec<NodeContent>> {
        if source.len() != self.cfg.block_len {
            return Err(Error::InvalidParameters(format!(
                "source has {} samples, block_len is {}",
                source.len(),
                self.cfg.block_len
            )));
        }
        let n = self.n();
        let quantize = |lat: Option<Lattice>, d: &[f64]| {
            lat.map(|l| source.iter().zip(d).map(|(&x, &dj)| l.index(x, dj)).collect::<Vec<_>>())
        };
        let idx = Indices {
            common: quantize(self.common, &dith.common),
            private: (0..n).map(|i| quantize(self.private, &dith.private[i])).collect(),
            top: quantize(self.top, &dith.top),
        };
        let common = match (self.common, &idx.common) {
            (Some(lat), Some(u)) => self.encode_stream(lat, &dith.common, u, &Side { common: None, private: vec![] }, dith)?,
            _ => Vec::new(),
        };
        let (shares, parity, top_len) = match (self.top, &idx.top) {
            (Some(lat), Some(t)) => {
                let bytes = self.encode_stream(lat, &dith.top, t, &self.side(&idx, dith, 0..n)?, dith)?;
                let (shares, parity) = self.split_top(&bytes);
                (shares, parity, bytes.len() as u32)
            }
            _ => (vec![Vec::new(); n], Vec::new(), 0),
        };
        (0..n)
            .map(|i| {
                Ok(NodeContent {
                    node: i + 1,
                    block,
                    common: common.clone(),
                    private: self.encode_private(i, &idx, dith)?,
                    top_share: shares[i].clone(),
                    top_parity: parity.clone(),
                    top_len,
                    repair_share: self.encode_repair((i + 1) % n, &idx, dith)?,
                })
            })
            .collect()
    }

    fn check_nodes(&self, nodes: &[&NodeContent]) -> Result<u64> {
        let first = nodes.first().ok_or_else(|| Error::InvalidParameters("no nodes given".into()))?;
        let mut seen = 0usize;
        for c in nodes {
            if c.node == 0 || c.node > self.n() {
                return Err(Error::InvalidParameters(format!("node id {} outside 1..={}", c.node, self.n())));
            }
            if seen >> (c.node - 1) & 1 == 1 {
                return Err(Error::InvalidParameters(format!("node {} given twice", c.node)));
            }
            if c.block != first.block {
                return Err(Error::InvalidParameters("nodes from different blocks".into()));
            }
            seen |= 1 << (c.node - 1);
        }
        Ok(first.block)
    }

    fn assemble_top(&self, nodes: &[&NodeContent]) -> Result<Vec<u8>> {
        let len = nodes[0].top_len as usize;
        match &self.rs {
            Some(rs) => {
                let avail: Vec<(usize, &[u8])> = nodes.iter().map(|c| (c.node - 1, c.top_share.as_slice())).collect();
                rs.decode(&avail, len)
            }
            None => {
                let mut halves = [None, None];
                for c in nodes {
                    halves[c.node - 1] = Some(c.top_share.as_slice());
                }
                match (halves[0], halves[1]) {
                    (Some(a), Some(b)) => {
                        let mut t = [a, b].concat();
                        t.truncate(len);
                        Ok(t)
                    }
                    _ => Err(Error::Decode("top description needs both nodes".into())),
                }
            }
        }
    }

    /// Decodes the descriptions reachable from `nodes`; the top one (and the
    /// private ones it needs) only if `with_top`.
    pub(crate) fn decode_indices(&self, nodes: &[&NodeContent], dith: &Dithers, with_top: bool) -> Result<Indices> {
        self.check_nodes(nodes)?;
        let n = self.n();
        let mut idx = Indices { common: None, private: vec![None; n], top: None };
        if let Some(lat) = self.common {
            let side = Side { common: None, private: vec![] };
            idx.common = Some(self.decode_stream(lat, &dith.common, &nodes[0].common, &side, dith)?);
        }
        let Some(lat) = self.private else { return Ok(idx) };
        for c in nodes {
            let i = c.node - 1;
            let p = self.decode_stream(lat, &dith.private[i], &c.private, &self.side(&idx, dith, std::iter::empty())?, dith)?;
            idx.private[i] = Some(p);
        }
        if !with_top || self.top.is_none() || nodes.len() < self.cfg.top_subset_size() {
            return Ok(idx);
        }
        let missing: Vec<usize> = (0..n).filter(|&i| idx.private[i].is_none()).collect();
        for &i in &missing {
            let holder = nodes
                .iter()
                .find(|c| c.node - 1 == self.repair_holder(i))
                .ok_or_else(|| Error::Decode(format!("repair stream of node {} unavailable", i + 1)))?;
            let p = self.decode_stream(lat, &dith.private[i], &holder.repair_share, &self.side(&idx, dith, self.others(i))?, dith)?;
            idx.private[i] = Some(p);
        }
        let top_bytes = self.assemble_top(nodes)?;
        let top_lat = self.top.expect("checked above");
        idx.top = Some(self.decode_stream(top_lat, &dith.top, &top_bytes, &self.side(&idx, dith, 0..n)?, dith)?);
        Ok(idx)
    }

    pub(crate) fn reconstruct(&self, idx: &Indices, dith: &Dithers) -> Reconstructions {
        let deq = |lat: Option<Lattice>, i: &Option<Vec<i64>>, d: &[f64]| match (lat, i) {
            (Some(l), Some(i)) => Some(i.iter().zip(d).map(|(&k, &dj)| l.reconstruct(k, dj)).collect()),
            _ => None,
        };
        Reconstructions {
            common: deq(self.common, &idx.common, &dith.common),
            private: (0..self.n()).map(|i| deq(self.private, &idx.private[i], &dith.private[i])).collect(),
            top: deq(self.top, &idx.top, &dith.top),
        }
    }

    /// LMMSE estimate from the subset `mask` (bit `i` is node `i + 1`).
    pub(crate) fn estimate(&self, mask: usize, rec: &Reconstructions) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cfg.block_len];
        for &(o, w) in &self.weights[mask] {
            let r = match o {
                Obs::Common => rec.common.as_ref(),
                Obs::Private(i) => rec.private[i].as_ref(),
                Obs::Top => rec.top.as_ref(),
            }
            .ok_or_else(|| Error::Decode("description needed by the estimator not decoded".into()))?;
            for (e, &v) in out.iter_mut().zip(r) {
                *e += w * v;
            }
        }
        Ok(out)
    }

    /// Estimate of the block from a subset of nodes.
    pub fn decode_subset(&self, nodes: &[&NodeContent]) -> Result<Vec<f64>> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameters("empty subset".into()));
        }
        let block = self.check_nodes(nodes)?;
        let dith = self.dithers(block);
        let idx = self.decode_indices(nodes, &dith, true)?;
        let mask = nodes.iter().fold(0usize, |m, c| m | 1 << (c.node - 1));
        self.estimate(mask, &self.reconstruct(&idx, &dith))
    }

    /// Rebuilds node `failed` (1-based) from the other `n - 1` nodes.
    pub fn repair_node(&self, survivors: &[&NodeContent], failed: usize) -> Result<NodeContent> {
        let block = self.check_nodes(survivors)?;
        self.repair_with(survivors, failed, &self.dithers(block))
    }

    pub(crate) fn repair_with(&self, survivors: &[&NodeContent], failed: usize, dith: &Dithers) -> Result<NodeContent> {
        let n = self.n();
        self.check_nodes(survivors)?;
        if failed == 0 || failed > n || survivors.len() != n - 1 || survivors.iter().any(|c| c.node == failed) {
            return Err(Error::InvalidParameters(format!(
                "repair of node {failed} needs the other {} nodes",
                n - 1
            )));
        }
        let f = failed - 1;
        let donor = survivors[0];
        let mut out = NodeContent {
            node: failed,
            block: donor.block,
            common: donor.common.clone(),
            private: Vec::new(),
            top_share: Vec::new(),
            top_parity: donor.top_parity.clone(),
            top_len: donor.top_len,
            repair_share: Vec::new(),
        };
        if let Some(lat) = self.private {
            let mut idx = self.decode_indices(survivors, dith, false)?;
            let holder = survivors
                .iter()
                .find(|c| c.node - 1 == self.repair_holder(f))
                .expect("all other nodes present");
            let side = self.side(&idx, dith, self.others(f))?;
            let p = self.decode_stream(lat, &dith.private[f], &holder.repair_share, &side, dith)?;
            idx.private[f] = Some(p);
            out.private = self.encode_private(f, &idx, dith)?;
            out.repair_share = self.encode_repair((f + 1) % n, &idx, dith)?;
        }
        if self.top.is_some() {
            out.top_share = match &self.rs {
                Some(rs) => {
                    let avail: Vec<(usize, &[u8])> =
                        survivors.iter().map(|c| (c.node - 1, c.top_share.as_slice())).collect();
                    rs.reconstruct(&avail, f)?
                }
                None => donor.top_share.iter().zip(&donor.top_parity).map(|(a, p)| a ^ p).collect(),
            };
        }
        Ok(out)
    }
}

/// Standard normal source block, derived from the seed and block number.
pub fn source_block(seed: u64, block: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * block);
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

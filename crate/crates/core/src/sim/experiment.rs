//! Repeated encode / fail / repair / measure trials.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scheme::{source_block, NodeContent, Reconstructions, SimConfig, Simulator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetStats {
    /// 1-based node ids.
    pub nodes: Vec<usize>,
    pub mse: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub block_len: usize,
    /// Mean serialized size of one node's content for one block.
    pub per_node_bits: f64,
    pub bits_per_sample: f64,
    /// Mean squared error by subset size, averaged over the subsets.
    pub empirical_d: BTreeMap<usize, f64>,
    /// One entry per trial and failed node, in that order.
    #[serde(skip)]
    pub repair_exact: Vec<bool>,
    pub repair_exact_rate: f64,
    /// Whether every subset distortion after repair matched the one before,
    /// bit for bit.
    pub post_repair_identical: bool,
    pub trials: usize,
    pub seed: u64,
    /// Pooled correlation of the private quantization errors across nodes.
    pub measured_rho: Option<f64>,
    pub subsets: Vec<SubsetStats>,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn all_repairs_exact(&self) -> bool {
        !self.repair_exact.is_empty() && self.repair_exact.iter().all(|&b| b)
    }
}

struct Trial {
    bits: usize,
    /// Per measured subset: sum of squared errors and of fourth powers.
    moments: Vec<(f64, f64)>,
    exact: Vec<bool>,
    identical: bool,
    cross: f64,
    square: f64,
}

fn moments(sim: &Simulator, masks: &[usize], rec: &Reconstructions, x: &[f64]) -> Result<Vec<(f64, f64)>> {
    masks
        .iter()
        .map(|&m| {
            let est = sim.estimate(m, rec)?;
            Ok(est.iter().zip(x).fold((0.0, 0.0), |(s2, s4), (e, x)| {
                let sq = (e - x) * (e - x);
                (s2 + sq, s4 + sq * sq)
            }))
        })
        .collect()
}

fn run_trial(sim: &Simulator, masks: &[usize], t: u64) -> Result<Trial> {
    let cfg = sim.config();
    let n = sim.n();
    let x = source_block(cfg.seed, t, cfg.block_len);
    let dith = sim.dithers(t);
    let nodes = sim.encode_with(&x, t, &dith)?;
    let refs: Vec<&NodeContent> = nodes.iter().collect();
    let rec = sim.reconstruct(&sim.decode_indices(&refs, &dith, true)?, &dith);
    let before = moments(sim, masks, &rec, &x)?;

    let (mut cross, mut square) = (0.0, 0.0);
    let errors: Vec<Vec<f64>> = rec
        .private
        .iter()
        .flatten()
        .map(|r| r.iter().zip(&x).map(|(r, x)| r - x).collect())
        .collect();
    for (a, ea) in errors.iter().enumerate() {
        square += ea.iter().map(|e| e * e).sum::<f64>();
        for eb in &errors[a + 1..] {
            cross += ea.iter().zip(eb).map(|(p, q)| p * q).sum::<f64>();
        }
    }

    let mut exact = Vec::with_capacity(n);
    let mut repaired = Vec::with_capacity(n);
    for f in 1..=n {
        let survivors: Vec<&NodeContent> = refs.iter().copied().filter(|c| c.node != f).collect();
        let node = sim.repair_with(&survivors, f, &dith)?;
        exact.push(node.to_bytes() == nodes[f - 1].to_bytes());
        repaired.push(node);
    }
    let repaired_refs: Vec<&NodeContent> = repaired.iter().collect();
    let rec_after = sim.reconstruct(&sim.decode_indices(&repaired_refs, &dith, true)?, &dith);
    let after = moments(sim, masks, &rec_after, &x)?;
    let identical = before.iter().zip(&after).all(|(a, b)| a.0.to_bits() == b.0.to_bits());

    let bits = nodes.iter().map(|c| 8 * c.to_bytes().len()).sum();
    Ok(Trial { bits, moments: before, exact, identical, cross, square })
}

/// Runs `trials` independent blocks; block `t` uses source and dithers
/// derived from the seed and `t`, so the report depends only on the inputs.
pub fn run_experiment(cfg: &SimConfig, trials: usize) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::InvalidParameters("trials must be at least 1".into()));
    }
    let sim = Simulator::new(cfg.clone())?;
    let n = sim.n();
    let max_m = cfg.top_subset_size();
    let masks: Vec<usize> = (1..1usize << n).filter(|m| m.count_ones() as usize <= max_m).collect();
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(&sim, &masks, t))
        .collect::<Result<Vec<_>>>()?;

    let samples = (trials * cfg.block_len) as f64;
    let mut subsets = Vec::with_capacity(masks.len());
    for (k, &mask) in masks.iter().enumerate() {
        let (s2, s4) = results.iter().fold((0.0, 0.0), |acc, t| (acc.0 + t.moments[k].0, acc.1 + t.moments[k].1));
        let mse = s2 / samples;
        let var = (s4 / samples - mse * mse).max(0.0);
        subsets.push(SubsetStats {
            nodes: (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect(),
            mse,
            std_error: (var / samples).sqrt(),
        });
    }
    let mut empirical_d = BTreeMap::new();
    for m in 1..=max_m {
        let of_size: Vec<f64> = subsets.iter().filter(|s| s.nodes.len() == m).map(|s| s.mse).collect();
        empirical_d.insert(m, of_size.iter().sum::<f64>() / of_size.len() as f64);
    }

    let repair_exact: Vec<bool> = results.iter().flat_map(|t| t.exact.iter().copied()).collect();
    let repair_exact_rate = repair_exact.iter().filter(|&&b| b).count() as f64 / repair_exact.len() as f64;
    let (cross, square) = results.iter().fold((0.0, 0.0), |acc, t| (acc.0 + t.cross, acc.1 + t.square));
    let measured_rho = (square > 0.0).then(|| {
        let pairs = (n * (n - 1) / 2) as f64;
        (cross / pairs) / (square / n as f64)
    });
    let per_node_bits = results.iter().map(|t| t.bits as f64).sum::<f64>() / (trials * n) as f64;

    Ok(SimReport {
        n,
        block_len: cfg.block_len,
        per_node_bits,
        bits_per_sample: per_node_bits / cfg.block_len as f64,
        empirical_d,
        repair_exact_rate,
        repair_exact,
        post_repair_identical: results.iter().all(|t| t.identical),
        trials,
        seed: cfg.seed,
        measured_rho,
        subsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::DistortionSpec;

    fn cfg(n: usize, seed: u64) -> SimConfig {
        SimConfig::for_spec(n, DistortionSpec::new(0.3, 0.2).unwrap(), 1000, seed).unwrap()
    }

    #[test]
    fn same_seed_same_report() {
        let a = run_experiment(&cfg(3, 5), 4).unwrap();
        let b = run_experiment(&cfg(3, 5), 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
        assert_ne!(a, run_experiment(&cfg(3, 6), 4).unwrap());
    }

    #[test]
    fn report_fields() {
        let r = run_experiment(&cfg(3, 1), 3).unwrap();
        assert_eq!(r.repair_exact.len(), 9);
        assert!(r.all_repairs_exact() && r.post_repair_identical);
        assert_eq!(r.repair_exact_rate, 1.0);
        assert_eq!(r.empirical_d.keys().copied().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(r.subsets.len(), 6);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["per_node_bits", "empirical_d", "repair_exact_rate", "trials", "seed", "measured_rho"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!(json["empirical_d"]["1"].is_number());
        assert!(json.get("repair_exact").is_none());
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_experiment(&cfg(2, 1), 0).is_err());
    }
}

//! Baseline and repair curves over a grid of two-node distortions at fixed `d1`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::two_node_ec_baseline_with;
use crate::error::{Error, Result};
use crate::types::DistortionSpec;

use super::minimize::OptimizerConfig;
use super::three_node::{modified_prp3_rate, prp3_rate, three_node_optimal, three_node_optimal_without_common};

pub const CSV_HEADER: &str = "d2,ec2,prp3,modified_prp3,repair3_nocommon,repair3_common,twonode_total";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d2: f64,
    /// Two nodes, no repair.
    pub ec2: f64,
    /// Three nodes, plain layered scheme, no repair.
    pub prp3: f64,
    /// Three nodes, layered scheme with a single top codeword, no repair.
    pub modified_prp3: f64,
    /// Three nodes with repair, no common codeword.
    pub repair3_nocommon: f64,
    /// Three nodes with repair.
    pub repair3_common: f64,
    /// Two nodes with repair.
    pub twonode_total: f64,
}

impl SweepRow {
    pub fn values(&self) -> [f64; 7] {
        [self.d2, self.ec2, self.prp3, self.modified_prp3, self.repair3_nocommon, self.repair3_common, self.twonode_total]
    }

    fn from_values(v: [f64; 7]) -> Self {
        Self {
            d2: v[0],
            ec2: v[1],
            prp3: v[2],
            modified_prp3: v[3],
            repair3_nocommon: v[4],
            repair3_common: v[5],
            twonode_total: v[6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub optimizer: OptimizerConfig,
    /// Left out unless requested so that reruns are byte-identical.
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub d1: f64,
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

/// `steps` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| if i == steps - 1 { hi } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 })
            .collect(),
    }
}

fn row(d1: f64, d2: f64, cfg: &OptimizerConfig) -> Result<SweepRow> {
    let spec = DistortionSpec::new(d1, d2)?;
    Ok(SweepRow {
        d2,
        ec2: two_node_ec_baseline_with(&spec, cfg)?,
        prp3: prp3_rate(&spec, cfg)?.r,
        modified_prp3: modified_prp3_rate(&spec, cfg)?.r,
        repair3_nocommon: three_node_optimal_without_common(&spec, cfg)?.r_total,
        repair3_common: three_node_optimal(&spec, cfg)?.r_total,
        twonode_total: 0.5 * (1.0 / d2).log2(),
    })
}

pub fn sweep(d1: f64, d2_grid: &[f64], cfg: &OptimizerConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut d2s = d2_grid.to_vec();
    d2s.sort_by(f64::total_cmp);
    let rows = d2s.par_iter().map(|&d2| row(d1, d2, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { d1, rows, metadata: SweepMetadata { optimizer: *cfg, timestamp: None } })
}

/// Nine significant digits.
pub fn fmt_sig(x: f64) -> String {
    // Adding zero turns -0 into 0.
    let x = x + 0.0;
    format!("{x:.8e}").parse::<f64>().map(|v| format!("{v}")).unwrap_or_else(|_| x.to_string())
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let c = &self.metadata.optimizer;
        writeln!(s, "# d1={}", fmt_sig(self.d1)).unwrap();
        writeln!(s, "# grid_points={} refine_iters={} tol={:e}", c.grid_points, c.refine_iters, c.tol).unwrap();
        if let Some(t) = &self.metadata.timestamp {
            writeln!(s, "# timestamp={t}").unwrap();
        }
        writeln!(s, "{CSV_HEADER}").unwrap();
        for r in &self.rows {
            let cells: Vec<String> = r.values().iter().map(|v| fmt_sig(*v)).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Domain(format!("sweep csv: {msg}"));
        let mut d1 = None;
        let mut optimizer = OptimizerConfig::default();
        let mut timestamp = None;
        let mut rows = Vec::new();
        let mut header_seen = false;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if let Some(meta) = line.strip_prefix('#') {
                for kv in meta.split_whitespace() {
                    let Some((k, v)) = kv.split_once('=') else { continue };
                    let num = || v.parse::<f64>().map_err(|e| bad(format!("{k}: {e}")));
                    match k {
                        "d1" => d1 = Some(num()?),
                        "grid_points" => optimizer.grid_points = num()? as usize,
                        "refine_iters" => optimizer.refine_iters = num()? as usize,
                        "tol" => optimizer.tol = num()?,
                        "timestamp" => timestamp = Some(v.to_string()),
                        _ => {}
                    }
                }
            } else if !header_seen {
                if line.trim() != CSV_HEADER {
                    return Err(bad(format!("unexpected header {line:?}")));
                }
                header_seen = true;
            } else {
                let cells = line
                    .split(',')
                    .map(|c| c.trim().parse::<f64>().map_err(|e| bad(format!("{c:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                let values: [f64; 7] = cells.try_into().map_err(|_| bad(format!("row {line:?} needs 7 cells")))?;
                rows.push(SweepRow::from_values(values));
            }
        }
        let d1 = d1.ok_or_else(|| bad("missing d1".into()))?;
        Ok(Self { d1, rows, metadata: SweepMetadata { optimizer, timestamp } })
    }
}

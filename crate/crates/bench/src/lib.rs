//! Fixtures shared by the benchmarks.

use mdrepair::sim::SimConfig;
use mdrepair::DistortionSpec;

pub fn spec(d1: f64, d2: f64) -> DistortionSpec {
    DistortionSpec::new(d1, d2).expect("valid distortions")
}

/// Optimal simulator configuration for `n` nodes at `(d1, d2)`.
pub fn sim_config(n: usize, d1: f64, d2: f64, block_len: usize) -> SimConfig {
    SimConfig::for_spec(n, spec(d1, d2), block_len, 1).expect("feasible configuration")
}

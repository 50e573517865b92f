//! Optimization over the private-noise correlation, the brute-force grid
//! oracle and baseline sweeps.

pub mod minimize;
pub mod oracle;
pub mod sweep;
pub mod three_node;

pub use minimize::{minimize_scalar, OptimizerConfig};
pub use oracle::{brute_force_oracle, OracleGrid, OracleObjective};
pub use sweep::{sweep, SweepResult, SweepRow};
pub use three_node::{
    modified_prp3_rate, prp3_rate, three_node_optimal, three_node_optimal_without_common, three_node_regime_optima,
    three_node_regime_optimum,
};

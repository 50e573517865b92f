//! Rate regions and an exact-repair storage simulator for multiple-description
//! coding of a unit-variance Gaussian source on `n` storage nodes.
//!
//! - [`entropy`] evaluates the achievable rate expressions numerically for
//!   symmetric Gaussian test channels.
//! - [`closed_form`] has the two-node optimum and the three-node formulas.
//! - [`explorer`] optimizes over the noise correlation, runs a brute-force
//!   oracle and produces baseline sweeps.
//! - [`sim`] stores quantized descriptions and repair codes on simulated
//!   nodes, fails and repairs them, and measures distortions.

pub mod closed_form;
pub mod entropy;
pub mod error;
pub mod explorer;
pub mod sim;
pub mod types;

pub use entropy::{
    build_covariance, cond_entropy, mmse_distortion, mutual_information, prop1_rate, prp_rate, theorem3_rates,
    theorem4_rates, CovarianceModel, RateEvaluation, RateTerm, Var, VariableSet,
};
pub use error::{Error, Result};
pub use types::{ChannelParams, DistortionSpec, LayerParams, RatePoint, Regime, ABSENT};

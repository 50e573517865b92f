use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid distortion spec: {0}")]
    InvalidSpec(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("unknown variable {0}")]
    UnknownVariable(String),

    #[error("variable {0} listed twice")]
    DuplicateVariable(String),

    #[error("sets overlap on {0}")]
    OverlappingSets(String),

    /// The conditioning block is numerically singular; use limit-form parameters.
    #[error("degenerate conditioning: pivot {pivot:e} on {label}")]
    DegenerateConditioning { label: String, pivot: f64 },

    /// The conditional covariance itself is singular, so the entropy is minus infinity.
    #[error("singular conditional covariance: pivot {pivot:e} on {label}")]
    SingularEntropy { label: String, pivot: f64 },

    #[error("no feasible point")]
    NoFeasiblePoint,

    #[error("configuration infeasible: {0}")]
    ConfigInfeasible(String),

    #[error("decode failed: {0}")]
    Decode(String),
}

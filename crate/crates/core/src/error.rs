use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid scale: scale factor must be strictly positive, got {0}")]
    InvalidScale(f64),

    #[error("invalid pair: {0}")]
    InvalidPair(String),

    #[error("mixture component budget exceeded: {got} components, budget {budget}")]
    BudgetExceeded { got: usize, budget: usize },

    #[error("insufficient grid coverage: truncated tail mass {tail:.3e} exceeds {limit:.3e}")]
    InsufficientCoverage { tail: f64, limit: f64 },

    #[error("unsupported estimator: {0}")]
    UnsupportedEstimator(String),

    #[error("estimator failed: {0}")]
    EstimatorFailed(String),

    #[error("invalid time: {0}")]
    InvalidTime(f64),

    #[error("invalid test function: {0}")]
    InvalidFunction(String),

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

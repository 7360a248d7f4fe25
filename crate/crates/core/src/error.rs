use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),

    #[error("{0} requires a problem with a constant Jacobian")]
    ConstantJacobianRequired(&'static str),

    #[error("error bound unknown for this problem (tau = 0)")]
    ErrorBoundUnknown,

    #[error("no history: the residual iterate needs a previous oracle value")]
    NoHistory,

    #[error("run diverged at iteration {iteration} (iterate norm {norm:e})")]
    Diverged { iteration: u64, norm: f64 },

    #[error("non-positive metric {value:e} at iteration {iteration}")]
    NonPositiveMetric { iteration: u64, value: f64 },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("trajectories do not share a record cadence")]
    MismatchedCadence,

    #[error("matrix sampling failed after {attempts} attempts: {reason}")]
    Sampling { attempts: usize, reason: String },

    #[error("missing experiment: {0}")]
    MissingExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by the radial solvers and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unsupported space dimension {0} (expected 3, 4 or 5)")]
    InvalidDimension(u32),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("domain too small: need r_max >= {required}, grid has {available}")]
    DomainTooSmall { required: f64, available: f64 },

    #[error("out of range: {0}")]
    Range(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("soliton fit undefined for an all-zero state")]
    UndefinedFit,

    #[error("accuracy check failed: {0}")]
    Accuracy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

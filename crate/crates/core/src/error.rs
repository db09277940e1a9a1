use thiserror::Error;

/// Errors raised by the simulators and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("drift function is negative ({value}) at z = {at}")]
    NegativeDrift { at: f64, value: f64 },

    #[error("size mismatch: expected N = {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("at least {required} replications are needed, got {got}")]
    InsufficientReplications { required: usize, got: usize },

    #[error("time {t} is at or beyond the absorption time {limit}")]
    BeyondAbsorption { t: f64, limit: f64 },

    #[error("curve never reached 1 before t = {0}")]
    NoHit(f64),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

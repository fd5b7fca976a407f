use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value is out of range or inconsistent. `key` names the
    /// offending field so callers can point the user at it.
    #[error("invalid configuration `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is singular or not positive definite")]
    Singular,

    #[error("rank-one update is singular (1 + tau q^H B^-1 q = 0)")]
    SingularUpdate,

    #[error("channel vector is zero; beamforming direction is undefined")]
    ZeroChannel,

    #[error("beamforming vector must have unit norm (got norm {0})")]
    NonUnitVector(f64),

    #[error("capacity limit is unbounded: {0}")]
    Unbounded(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

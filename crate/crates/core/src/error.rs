use thiserror::Error;

/// Errors produced by the simulation and estimation routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("constraint violation: {0}")]
    Constraint(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-monotone reference cdf at sample {index}: F({x}) = {fx} after {prev}")]
    NonMonotoneCdf {
        index: usize,
        x: f64,
        fx: f64,
        prev: f64,
    },
    #[error("simulation failed on path {path}: {reason}")]
    PathFailure { path: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub(crate) fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }

    pub(crate) fn insufficient(msg: impl Into<String>) -> Self {
        Error::InsufficientData(msg.into())
    }
}

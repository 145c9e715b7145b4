use thiserror::Error;

/// Errors produced by model construction and the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("eigensolver failed to converge for eigenvalue index {index}")]
    NoConvergence { index: usize },

    #[error("negative radicand {value} in coupling of basis state {state}")]
    NegativeRadicand { value: f64, state: usize },

    #[error("operation not supported for this model: {0}")]
    Unsupported(String),

    #[error("point outside the classical domain: {0}")]
    Domain(String),

    #[error("too few levels: need at least {needed}, got {got}")]
    TooFewLevels { needed: usize, got: usize },

    #[error("basis mismatch between pre- and post-quench Hamiltonians: {0}")]
    BasisMismatch(String),

    #[error("critical quench undefined: {0}")]
    CriticalQuench(String),

    #[error("at lambda = {lambda}: {source}")]
    AtLambda {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid window: {0}")]
    Window(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

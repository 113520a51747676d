use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid dims: {0}")]
    InvalidDims(String),

    #[error("grid size mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dz must be non-negative everywhere (the gel cannot be pulled below rest)")]
    NegativeDz,

    #[error("fz must be non-negative everywhere")]
    NegativeFz,

    #[error("{field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("invalid time window [{start}, {end}]")]
    BadWindow { start: f64, end: f64 },

    #[error("mean slope is zero; relative deviation is undefined")]
    ZeroMeanSlope,

    #[error("closure would become negative")]
    NegativeClosure,

    #[error("slip injection at t={t_slip}s is before the current simulation time t={now}s")]
    SlipInPast { t_slip: f64, now: f64 },

    #[error("{what} differential must be positive")]
    NonPositiveDifferential { what: &'static str },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

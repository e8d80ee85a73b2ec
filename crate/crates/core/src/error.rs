use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("AR polynomial is not causal: root with modulus {modulus:.6} inside or on the unit circle")]
    NonCausalAr { modulus: f64 },

    #[error("sample path carries no innovation record")]
    MissingInnovations,

    #[error("all weights are zero")]
    DegenerateWeights,

    #[error("periodogram ordinate I_{index} is zero")]
    DegeneratePeriodogram { index: usize },

    #[error("eigenvalue iteration did not converge after {iterations} steps")]
    NoConvergence { iterations: usize },

    #[error("need at least {required} samples, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            message: msg.into(),
        }
    }
}

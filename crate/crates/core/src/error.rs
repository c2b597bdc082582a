//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by models, estimators, detectors and the Monte-Carlo harness.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A natural parameter fell outside the model's natural domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A mean-domain value was outside the image of the mean map.
    #[error("mean-domain violation: {0}")]
    MeanDomain(String),

    /// An update produced a value that projection could not bring back
    /// into the natural domain.
    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    /// The Bregman-sum regret identity was requested outside its
    /// preconditions (full-space feasible set, 1/t step sizes).
    #[error("regret identity not applicable: {0}")]
    IdentityNotApplicable(&'static str),

    /// A configuration was internally inconsistent or unparseable.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two sequences that must align had different lengths.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// I/O failure while reading or writing harness artifacts.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

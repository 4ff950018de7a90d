//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by matrix construction, extraction, evaluation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition was violated by the caller (bad dimensions,
    /// out-of-range parameter, all-zero input, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The candidate and runner-up directions are numerically parallel, so the
    /// diversification coefficient has no solution in (0,1).
    #[error("degenerate direction: candidate and runner-up columns are parallel")]
    DegenerateDirection,

    /// Syntactic failure while reading a file.
    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// A file parsed but its contents are unusable (non-finite entry, payload
    /// size mismatch, unknown tag, ...).
    #[error("invalid data in {path}: {message}")]
    InvalidData { path: String, message: String },

    /// Underlying filesystem failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared by every module of the library.

use thiserror::Error;

/// Failure modes surfaced by the library.
///
/// The split mirrors how callers are expected to react: bad inputs are
/// programming errors at the call site, `Unsupported` signals a request the
/// library deliberately refuses (caller should fall back to a numeric
/// routine), and `NumericFailure` reports an iteration that did not converge.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The request is outside what this routine can answer exactly
    /// (e.g. no closed form exists); callers fall back to the oracle.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An iterative routine failed to converge; the message carries the
    /// best value reached.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Output file or stream could not be written.
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::NumericFailure(msg.into())
    }
}

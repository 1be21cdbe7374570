use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the engine. The variants line up with the exit-code
/// classes used by the command line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("forbidden: {0}")]
    Forbidden(String),

    #[error("denied: {0}")]
    Denied(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("integrity error in {record}: {message}")]
    Integrity { record: String, message: String },

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn not_found(msg: impl Into<String>) -> Self {
        Error::NotFound(msg.into())
    }

    pub(crate) fn conflict(msg: impl Into<String>) -> Self {
        Error::Conflict(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for the domain failures (conflict, not-found, denied, ...) as
    /// opposed to I/O and parse failures.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::NotFound(_)
                | Error::Conflict(_)
                | Error::Forbidden(_)
                | Error::Denied(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

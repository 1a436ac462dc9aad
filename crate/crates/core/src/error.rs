use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid, optics, turbulence or simulation parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Operands have incompatible shapes or grids.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Not enough (or degenerate) samples for a statistic.
    #[error("statistics error: {0}")]
    Statistics(String),

    #[error(transparent)]
    Persistence(#[from] PersistenceError),
}

/// Failures reading or writing ensemble cache files.
#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}: not an ensemble cache file (bad magic)")]
    BadMagic(PathBuf),

    #[error("{path}: unsupported cache format version {found} (expected {expected})")]
    Version {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("{path}: file truncated ({found} bytes, expected {expected})")]
    Truncated {
        path: PathBuf,
        found: u64,
        expected: u64,
    },

    #[error("{path}: config hash mismatch (header {found}, expected {expected})")]
    HashMismatch {
        path: PathBuf,
        found: String,
        expected: String,
    },

    #[error("{path}: malformed cache: {reason}")]
    Malformed { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn statistics(msg: impl Into<String>) -> Self {
        Error::Statistics(msg.into())
    }
}

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("i/o error on {path}: {source}")]
    IoAt {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// Malformed header, bad magic, unsupported version or unrepresentable dims.
    #[error("format error: {0}")]
    Format(String),

    #[error("truncated payload: expected {expected} bytes, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("corrupt stream: {0}")]
    Corrupt(String),

    #[error("out of bounds: {0}")]
    Bounds(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Carried release-time state does not match the window it is applied to.
    #[error("inconsistent release-time state: {0}")]
    StateInconsistent(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("manifest error: {0}")]
    Manifest(String),
}

impl Error {
    pub(crate) fn io_at(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::IoAt {
            path: path.into(),
            source,
        }
    }
}

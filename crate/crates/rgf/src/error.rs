//! Crate-wide error type.

use std::path::PathBuf;

/// Errors reported by data loading, model (de)serialization, configuration
/// validation and training.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A malformed line in a data or model file. `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// I/O failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Feature matrix and target file disagree on the number of rows.
    #[error("target count mismatch: {targets} targets for {rows} feature rows")]
    TargetCountMismatch { targets: usize, rows: usize },

    /// A model file violates the format or a structural invariant.
    #[error("model format: {0}")]
    ModelFormat(String),

    /// A label is not in `{-1, +1}` but the loss requires binary labels.
    #[error("row {row}: label {value} invalid; {loss} loss requires labels in {{-1, +1}}")]
    LabelNotBinary {
        row: usize,
        value: f64,
        loss: &'static str,
    },

    /// The requested operation does not apply to this dataset/loss combination.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for line-level parse errors.
    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

/// Errors produced by the field containers, solvers and metrics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("ground truth is degenerate under the mask: {positives} positive and {negatives} negative pixels")]
    DegenerateGroundTruth { positives: usize, negatives: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Whether the error originates from the filesystem or a file decoder
    /// rather than from the numbers themselves.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Format { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

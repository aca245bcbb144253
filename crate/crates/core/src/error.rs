use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate plane: {0}")]
    DegeneratePlane(&'static str),

    #[error("batch is empty")]
    EmptyBatch,

    #[error("domain {0:?} has no samples")]
    EmptyDomain(String),

    #[error("loss became non-finite at step {step}; lower the learning rate")]
    NonFinite { step: usize },

    #[error("data variance is concentrated in fewer than two directions")]
    RankDeficient,

    #[error("bad image dimensions {width}x{height}: {reason}")]
    BadDimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("{side} feature {index} has zero norm")]
    DegenerateFeature { side: &'static str, index: usize },

    #[error("match list is empty")]
    EmptyMatches,

    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}

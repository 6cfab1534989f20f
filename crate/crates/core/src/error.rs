use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate orbit: {0}")]
    DegenerateOrbit(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimsMismatch { expected: String, actual: String },

    #[error("shape mismatch at layer {layer}: {detail}")]
    ShapeMismatch { layer: usize, detail: String },

    #[error("parse error at byte offset {offset}: {detail}")]
    Parse { offset: u64, detail: String },

    #[error("stale cache: forward pass ran against parameter version {cached}, current is {current}")]
    StaleCache { cached: u64, current: u64 },

    #[error("architecture mismatch: {0}")]
    ArchitectureMismatch(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    Divergence { epoch: usize, batch: usize, loss: f64 },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn dims(expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimsMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}

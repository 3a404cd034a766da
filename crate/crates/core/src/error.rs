use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("attribute index {index} out of range for {n} attributes")]
    Index { index: usize, n: usize },

    #[error("layout mismatch: {0}")]
    Layout(String),

    #[error("degenerate batch: batch normalization in train mode needs at least 2 rows, got {0}")]
    DegenerateBatch(usize),

    #[error("non-finite gradient for parameter `{0}`")]
    NonFiniteGradient(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("attribute {0} is degenerate: no image lacks it")]
    DegenerateAttribute(usize),

    #[error("census has no useful pairs (fewer than two distinct labels present)")]
    NoUsefulPairs,

    #[error("iterative bound degenerates: {0}; use simulation instead")]
    DegenerateBound(String),

    #[error("scheduler exhausted: every attribute is degenerate")]
    SchedulerExhausted,

    #[error("invalid synthetic spec: {0}")]
    Spec(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image {path}: {msg}")]
    Image { path: PathBuf, msg: String },

    #[error("labels do not differ at attribute {0}; pass --force to proceed anyway")]
    NotUseful(usize),

    #[error("empty dataset")]
    EmptyDataset,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}

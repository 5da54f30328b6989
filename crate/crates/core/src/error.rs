use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("line {line}: relevance must be 0 or 1, got `{value}`")]
    NonBinaryRelevance { line: usize, value: String },

    #[error("unknown document `{0}`")]
    UnknownDocument(String),

    #[error("unknown query `{0}`")]
    UnknownQuery(String),

    #[error("query `{0}` has no relevant document")]
    NoRelevant(String),

    #[error("corpus cannot supply {needed} documents, only {available} available")]
    InsufficientDocuments { needed: usize, available: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("no negative instances to analyze")]
    NoNegatives,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite logits ({0}, {1})")]
    NonFiniteLogits(f64, f64),

    #[error("checkpoint version {found} is not supported (expected {expected})")]
    CheckpointVersion { found: u32, expected: u32 },

    #[error("checkpoint dimensions {found_d}x{found_h} do not match expected {expected_d}x{expected_h}")]
    CheckpointDims {
        found_d: usize,
        found_h: usize,
        expected_d: usize,
        expected_h: usize,
    },

    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for filesystem failures, as opposed to problems with the data itself.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

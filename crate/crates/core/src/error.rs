use thiserror::Error;

/// Errors surfaced by the engine and its components.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("idf queried on a sketch that has absorbed no documents")]
    EmptySketch,

    #[error("idf queried on untouched bucket {0}")]
    UntouchedBucket(usize),

    #[error("token {0:?} is not in the vocabulary index")]
    UnknownToken(String),

    #[error("degenerate correlation sample: {0}")]
    DegenerateSample(String),

    #[error("no rounds recorded")]
    NoRounds,

    #[error("unsupported model snapshot: format {format:?} version {version}")]
    SnapshotFormat { format: String, version: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

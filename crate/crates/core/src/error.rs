use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("empty collection")]
    EmptyCollection,

    #[error("empty dictionary")]
    EmptyDictionary,

    #[error("zero vector")]
    ZeroVector,

    #[error("document `{0}` has no tokens")]
    EmptyDocument(String),

    #[error("document `{0}` has not been applied to the term statistics")]
    NotApplied(String),

    #[error("invalid positions: {0}")]
    InvalidPositions(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid ground truth: {0}")]
    InvalidTruth(String),

    #[error("need at least two paired observations, got {0}")]
    TooFewPairs(usize),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

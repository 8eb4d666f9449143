use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a braid needs at least 2 strands, got {0}")]
    TooFewStrands(usize),

    #[error("a braid word needs at least one slot")]
    NoSlots,

    #[error("expected {expected} letters, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("letter {letter} at index {index} is out of range for {strands} strands (|e| <= {})", strands - 1)]
    LetterOutOfRange {
        index: usize,
        letter: i32,
        strands: usize,
    },

    #[error("free-group letter at index {index} is {letter}; letters must be nonzero with |x| <= {rank}")]
    BadFreeLetter {
        index: usize,
        letter: i32,
        rank: usize,
    },

    #[error("braid generator {generator} is out of range for {strands} strands")]
    BadGenerator { generator: i32, strands: usize },

    #[error("free word grew past {limit} letters")]
    ResourceLimit { limit: usize },

    #[error("mask has {got} entries but the action grid has {expected}")]
    MaskLength { expected: usize, got: usize },

    #[error("unknown action id {id} (grid has {size} actions)")]
    UnknownAction { id: usize, size: usize },

    #[error("move {action} does not apply to {word:?}")]
    Inapplicable { action: String, word: Vec<i32> },

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    #[error("generation failed after {retries} retries")]
    GenerationFailed { retries: u32 },

    #[error("record {index}: {source}")]
    Record {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid environment config: {0}")]
    InvalidEnvConfig(String),

    #[error("episode already finished")]
    EpisodeFinished,

    #[error("no legal move in the current state")]
    NoLegalMove,

    #[error("invalid network dimensions: {0}")]
    InvalidDims(String),

    #[error("feature vector has {got} entries, network expects {expected}")]
    InputSize { expected: usize, got: usize },

    #[error("non-finite gradient in {tensor} at index {index}")]
    NonFiniteGradient { tensor: &'static str, index: usize },

    #[error("training diverged at iteration {iteration}: {reason}")]
    Diverged { iteration: usize, reason: String },

    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error("incompatible dimensions: {0}")]
    Incompatible(String),

    #[error("invalid training config: {0}")]
    InvalidTrainConfig(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("oracle disagrees: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

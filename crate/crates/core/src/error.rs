//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(String),

    #[error("{file}:{line}: {reason}")]
    MalformedRow {
        file: String,
        line: usize,
        reason: String,
    },

    #[error("duplicate codepoint U+{0:04X}")]
    DuplicateCodepoint(u32),

    #[error("empty lexicon")]
    EmptyLexicon,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty vocabulary after pruning (min_count too high?)")]
    EmptyVocabulary,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("class {label:?} has only {count} samples, cannot {action}")]
    ClassTooSmall {
        label: String,
        count: usize,
        action: String,
    },

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: String,
        expected: String,
        actual: String,
    },

    #[error("token id {id} out of range (vocab size {vocab_size})")]
    InvalidTokenId { id: usize, vocab_size: usize },

    #[error("non-finite logit at index {0}")]
    NonFiniteLogit(usize),

    #[error("intensity factor {0} outside [1, 2)")]
    IntensityOutOfRange(f64),

    #[error("text score {0} outside [0, 1]")]
    TextScoreOutOfRange(f64),

    #[error("probabilities sum to {sum}, off by more than {tolerance}")]
    UnnormalizedDistribution { sum: f64, tolerance: f64 },

    #[error("label set mismatch: expected {expected:?}, got {actual:?}")]
    LabelSetMismatch {
        expected: Vec<String>,
        actual: Vec<String>,
    },

    #[error("remote classify failed after {attempts} attempt(s): {reason}")]
    Remote { attempts: u32, reason: String },

    #[error("classifying message from {sender} at {timestamp}: {source}")]
    MessageFailed {
        sender: String,
        timestamp: String,
        #[source]
        source: Box<Error>,
    },

    #[error("no messages")]
    NoMessages,

    #[error("model artifact: {0}")]
    ModelFormat(String),

    #[error("weight manifest: {0}")]
    WeightManifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

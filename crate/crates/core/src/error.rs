use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("label not found: {0}")]
    LabelNotFound(String),

    #[error("invalid phoneme pair: {0} with itself")]
    InvalidPair(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("inventory conflict: {symbol} is {first} in one source and {second} in another")]
    InventoryConflict {
        symbol: String,
        first: String,
        second: String,
    },

    #[error("invalid phoneme label {symbol:?}: {reason}")]
    InvalidLabel { symbol: String, reason: String },

    #[error("{source_kind} line {line}: {message}")]
    Parse {
        source_kind: &'static str,
        line: usize,
        message: String,
    },

    #[error("line {line}: unknown phoneme {phoneme:?}")]
    UnknownPhoneme { phoneme: String, line: usize },

    #[error("out of vocabulary: {}", .0.join(", "))]
    OutOfVocabulary(Vec<String>),

    #[error("phoneme {0:?} is not mapped by the P2V map")]
    UnmappedPhoneme(String),

    #[error("metric undefined: reference has no labels")]
    UndefinedMetric,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least 2 folds, got {0}")]
    InsufficientFolds(usize),

    #[error("need at least 2 speakers, got {0}")]
    InsufficientSpeakers(usize),

    #[error("unknown speaker: {0}")]
    UnknownSpeaker(String),

    #[error("invalid confusion profile: {0}")]
    Profile(String),

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(source_kind: &'static str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_kind,
            line,
            message: message.into(),
        }
    }
}

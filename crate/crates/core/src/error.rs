use thiserror::Error;

use crate::hypothesis::Instance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("instance {0} is not in the class domain")]
    UnknownInstance(Instance),
    #[error("hypothesis index {index} out of range for class of {count} hypotheses")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("version space is empty")]
    EmptyVersionSpace,
    #[error("learner is in the agnostic phase; no version space to consult")]
    WrongPhase,
    #[error("expected advice of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("version space emptied at round {round}; the sequence is not realizable by the class")]
    VersionSpaceExhausted { round: usize },
    #[error("invalid hypothesis class: {0}")]
    InvalidClass(String),
    #[error("invalid experiment case: {0}")]
    InvalidCase(String),
    #[error("exhaustive enumeration of {len}! permutations exceeds the cap of {cap}")]
    FactorialCapExceeded { len: usize, cap: usize },
    #[error("unsupported report format `{0}`")]
    UnsupportedFormat(String),
    #[error("report list is empty")]
    EmptyReport,
    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use alloc::string::String;

/// Domain errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("empty input")]
    EmptyInput,
    #[error("class {0:?} empty after filtering")]
    EmptyClass(String),
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("unknown prompt {0:?}")]
    UnknownPrompt(String),
    #[error("invalid document: {0}")]
    InvalidDocument(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no scoreable tokens")]
    NoScoreableTokens,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("token id {id} out of range for vocabulary of size {size}")]
    TokenOutOfRange { id: u32, size: usize },
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error("adversary pool is empty")]
    EmptyPool,
    #[error("missing confound distribution for training document {0}")]
    MissingConfound(usize),
    #[error("no documents with required fields")]
    NoUsableDocuments,
}

pub type Result<T> = core::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("resource exceeded: {0}")]
    ResourceExceeded(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("unknown function name: {0}")]
    UnknownName(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("unknown agent {0}")]
    UnknownAgent(String),
    #[error("illegal move {0}")]
    IllegalMove(String),
    #[error("invalid lasso: {0}")]
    InvalidLasso(String),
    #[error("invalid game: {}", .0.join("; "))]
    InvalidGame(Vec<String>),
    #[error("invalid preference: {0}")]
    InvalidPreference(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("incompatible threshold: {0}")]
    IncompatibleThreshold(String),
    #[error("instance exceeds guard: {0}")]
    GuardExceeded(String),
    #[error("mixed preference classes: {0}")]
    MixedClasses(String),
    #[error("monotonicity violation: {0}")]
    Monotonicity(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

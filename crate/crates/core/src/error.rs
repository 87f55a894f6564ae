use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamsysError {
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("spec error: {0}")]
    Spec(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error at x = {x}: {msg}")]
    Domain { x: f64, msg: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepUnderflow { x: f64, h: f64 },

    #[error("singular matrix at x = {x}: {what}")]
    Singular { x: f64, what: String },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("unknown id '{0}'")]
    UnknownId(String),

    #[error("inconsistent result: {0}")]
    Inconsistent(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, HamsysError>;

impl From<std::io::Error> for HamsysError {
    fn from(e: std::io::Error) -> Self {
        HamsysError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HamsysError {
    fn from(e: serde_json::Error) -> Self {
        HamsysError::Spec(e.to_string())
    }
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("non-finite integrand value at ln t = {x}")]
    NonFinite { x: f64 },
    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

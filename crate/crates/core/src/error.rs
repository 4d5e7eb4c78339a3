use thiserror::Error;

/// Errors raised by the solver core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EfkError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("non-finite values in input")]
    NonFinite,
    #[error("singular value decomposition failed")]
    SvdFailure,
    #[error("division by zero: {0}")]
    ZeroReference(&'static str),
}

pub type Result<T> = core::result::Result<T, EfkError>;

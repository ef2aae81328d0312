use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdcsError {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("bound inversion at index {0}")]
    BoundInversion(usize),
    #[error("invalid scaling: {0}")]
    InvalidScaling(String),
    #[error("root finder failed: {0}")]
    RootFinding(String),
    #[error("invalid program: {}", .0.join("; "))]
    InvalidProgram(Vec<String>),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for PdcsError {
    fn from(e: std::io::Error) -> Self {
        PdcsError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PdcsError>;

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(PdcsError::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}

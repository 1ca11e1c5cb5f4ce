use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AswError {
    #[error("extension degree {requested} exceeds the configured cap {cap}")]
    DegreeCap { requested: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("linearised polynomial is not separable (zero linear coefficient)")]
    NonSeparable,

    #[error("mathematical inconsistency: {0}")]
    Inconsistent(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("characteristic mismatch: {0}")]
    Characteristic(String),

    #[error("pole growth bound violated: order {order} exceeds bound {bound} at level {level}")]
    PoleGrowth { level: usize, order: i64, bound: i64 },
}

impl AswError {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            AswError::Parse(_) | AswError::Io(_) | AswError::Unsupported(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for AswError {
    fn from(e: std::io::Error) -> Self {
        AswError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for AswError {
    fn from(e: serde_json::Error) -> Self {
        AswError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AswError>;

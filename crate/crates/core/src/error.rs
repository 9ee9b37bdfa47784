use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value {value} in {context}")]
    NonFiniteValue { value: f64, context: String },

    #[error("invalid count: {0}")]
    InvalidCount(String),

    #[error("direction count mismatch: {left} vs {right}")]
    DirectionCountMismatch { left: usize, right: usize },

    #[error("at least two data sets are required, got {0}")]
    TooFewSets(usize),

    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),

    #[error("number of directions must be at least 2, got {0}")]
    InvalidM(usize),

    #[error("hypothesis violated: epsilon(delta) = {epsilon} is not below gamma = {gamma}")]
    HypothesisViolated { epsilon: f64, gamma: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("k must lie in 1..={max}, got {k}")]
    InvalidK { k: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("parse error in {}{}: {message}", path.display(), line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },

    #[error("i/o error on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl Error {
    /// Errors caused by bad input data rather than bad arguments.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::EmptyInput(_)
                | Error::InvalidGrid(_)
                | Error::GridMismatch(_)
                | Error::LengthMismatch { .. }
                | Error::NonFiniteValue { .. }
                | Error::TooFewSets(_)
                | Error::LabelMismatch(_)
                | Error::Parse { .. }
                | Error::Io { .. }
        )
    }
}

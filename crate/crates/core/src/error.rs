use thiserror::Error;

/// Errors raised by matrix construction, decomposition and scheduling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must be square and non-empty (got {rows} rows, row {bad_row} has {cols} columns)")]
    NotSquare { rows: usize, bad_row: usize, cols: usize },
    #[error("cell ({row},{col}) is invalid: {value}")]
    InvalidCell { row: usize, col: usize, value: f64 },
    #[error("diagonal cell ({0},{0}) must be zero")]
    NonZeroDiagonal(usize),
    #[error("size mismatch: expected n={expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("not a derangement: {0}")]
    NotDerangement(String),
    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),
    #[error("no perfect matching on the remaining support (residual {residual})")]
    NoPerfectMatching { residual: f64 },
    #[error("traffic entry at slot {slot} uses link ({x},{y}) which is not in the configuration")]
    InadmissibleEntry { slot: usize, x: usize, y: usize },
    #[error("traffic entry is neither direct nor a hop of its flow: {0}")]
    MalformedEntry(String),
    #[error("schedule carries no traffic")]
    EmptySchedule,
    #[error("completion time must be positive, got {0}")]
    NonPositiveDct(f64),
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

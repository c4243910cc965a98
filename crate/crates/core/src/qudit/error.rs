use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuditError {
    #[error("index {index:?} out of range for dims {dims:?}")]
    IndexOutOfRange { index: Vec<usize>, dims: Vec<usize> },
    #[error("all amplitudes are zero")]
    ZeroState,
    #[error("amplitude vector has length {got}, dims require {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid dimensions {0:?}")]
    InvalidDims(Vec<usize>),
    #[error("unsupported basis {kind} for dimension {dim}")]
    UnsupportedBasis { kind: String, dim: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("projection onto outcome {outcome} of subsystem {subsystem} has zero probability")]
    ZeroProbability { subsystem: usize, outcome: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
}

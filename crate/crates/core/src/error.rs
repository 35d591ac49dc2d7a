use thiserror::Error;

/// Errors raised across circuit construction, extraction and decoding.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("frame size mismatch: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },

    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid logical circuit: {0}")]
    Spec(String),

    #[error("malformed circuit: {0}")]
    Circuit(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("detector error model extraction failed: {0}")]
    Extraction(String),

    #[error("decoding failed: {0}")]
    Decode(String),

    #[error("dimension mismatch: {0}")]
    Contract(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised across circuit construction, simulation, cutting and training.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for width {width}")]
    IndexOutOfRange { index: usize, width: usize },

    #[error("{kind} expects {expected} qubit(s), got {got}")]
    ArityMismatch {
        kind: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("gate {kind} addresses qubit {qubit} more than once")]
    DuplicateQubit { kind: &'static str, qubit: usize },

    #[error("gate {kind} has an invalid parameter: {reason}")]
    BadParameter { kind: &'static str, reason: String },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported operation {kind} in {context}")]
    UnsupportedOp {
        kind: &'static str,
        context: &'static str,
    },

    #[error("bad Pauli string `{0}`")]
    BadPauliString(String),

    #[error("gate {0} cannot be cut")]
    UncuttableGate(String),

    #[error("{requested} cuts exceed the cap of {cap}")]
    TooManyCuts { requested: usize, cap: usize },

    #[error("value out of range: {0}")]
    BadRange(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("invalid head configuration: {0}")]
    HeadConfigInvalid(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("asset corrupt: {0}")]
    AssetCorrupt(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Parse(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error classes, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Capacity,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Validation => 1,
            ErrorClass::Capacity => 2,
            ErrorClass::Io => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph has a cycle through vertex {0}")]
    Cycle(usize),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("{what}: {states} joint states exceed the enumeration cap of {cap}")]
    Capacity { what: String, states: u128, cap: u128 },

    #[error("faithfulness violated: {0}")]
    Faithfulness(String),

    #[error("generation failed after {attempts} attempts: {reason}")]
    GenerationFailure { attempts: usize, reason: String },

    #[error("no successful intervention X{node}={value} among {m} samples; raise m")]
    DegenerateSample { node: usize, value: usize, m: usize },

    #[error("estimated edge set is cyclic ({edges} edges); cannot reduce")]
    CyclicEstimate { edges: usize },

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported feature: {0}")]
    Unsupported(String),

    #[error("malformed model: {0}")]
    MalformedModel(String),

    #[error("schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Capacity { .. } => ErrorClass::Capacity,
            Error::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Validation,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

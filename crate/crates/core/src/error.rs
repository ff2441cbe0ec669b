use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// Integer range overflow or an argument outside the sieved range.
    #[error("range error: {0}")]
    Range(String),
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Input violates an operation's precondition (e.g. not square-free).
    #[error("contract violation: {0}")]
    Contract(String),
    /// Exhaustive computation refused or aborted because of its size.
    #[error("scale error: {0}")]
    Scale(String),
    /// The interval contains no square-free integer.
    #[error("degenerate interval: {0}")]
    Degenerate(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Domain(_) | LabError::Config(_) | LabError::Contract(_) => 2,
            LabError::Range(_) | LabError::Scale(_) | LabError::Degenerate(_) => 3,
            LabError::Io(_) | LabError::Serde(_) => 4,
        }
    }
}

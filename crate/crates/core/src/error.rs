use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid of {nodes} nodes exceeds the cap of {cap} nodes")]
    ResourceCap { nodes: u128, cap: u128 },

    #[error("no lattice point found within {steps} walk samples")]
    NotFound { steps: u64 },

    #[error("lattice coordinate overflow: |m| exceeds 2^62")]
    Overflow,

    #[error("bracket invalid: {0}")]
    BracketInvalid(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

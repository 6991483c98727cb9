use alloc::string::String;

/// Errors raised by graph construction and analysis.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("node id {id} out of range for graph with {n} nodes")]
    InvalidNode { id: usize, n: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested exact computation is beyond the configured limit.
    #[error("{what}: size {size} exceeds limit {limit}")]
    LimitExceeded { what: &'static str, size: u64, limit: u64 },

    #[error("terminals lie in different components; no tree connects them")]
    NoTree,

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("sampling failed: {0}")]
    Sampling(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for refusals caused by size limits rather than bad input.
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Error::LimitExceeded { .. } | Error::Sampling(_) | Error::Generation(_) | Error::NoTree
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] xpand_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    /// Malformed file contents or command-line values.
    #[error("{0}")]
    Format(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    /// A replayed run produced different bytes or saw different inputs.
    #[error("replay mismatch: {0}")]
    Mismatch(String),

    /// A check ran to completion and failed.
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl Error {
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for refusals and failed checks, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(e) if e.is_refusal() => 1,
            Error::Mismatch(_) | Error::CheckFailed(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

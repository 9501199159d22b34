use thiserror::Error;

/// Library-wide error type.
///
/// `Input` covers malformed arguments, files, and configuration; `Numerical`
/// covers linear-algebra failures that survive jitter escalation. The CLI
/// maps these to exit codes 1 and 2 respectively.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit code for the CLI: 1 for input/IO problems, 2 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Io(_) => 1,
            Error::Numerical(_) => 2,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Non-finite or otherwise unusable numeric input.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// The received signal power used for SNR calibration is zero.
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// Malformed binary file (bad magic, truncated payload, count mismatch).
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("class balance: {0}")]
    ClassBalance(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool: 1 for configuration
    /// problems, 2 for everything that goes wrong while reading or processing data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            _ => 2,
        }
    }
}

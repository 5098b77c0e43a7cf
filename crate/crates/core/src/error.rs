use std::path::PathBuf;

/// Library error categories; the CLI maps `Config` to exit code 2 and the
/// rest to exit code 3.
#[derive(Debug, thiserror::Error)]
pub enum MmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("runtime error: {0}")]
    Runtime(String),
}

pub type Result<T> = std::result::Result<T, MmError>;

pub(crate) fn invalid(msg: impl Into<String>) -> MmError {
    MmError::InvalidArgument(msg.into())
}

use std::fmt::Display;
use std::io;
use std::path::{Path, PathBuf};

/// Top-level failure of a pipeline stage. Each variant maps to one process
/// exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("network: {0}")]
    Network(String),
}

impl Error {
    pub fn usage(msg: impl Display) -> Self {
        Error::Usage(msg.to_string())
    }

    pub fn data(msg: impl Display) -> Self {
        Error::Data(msg.to_string())
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    /// 1 usage, 2 data, 3 I/O or network.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Data(_) => 2,
            Error::Io { .. } | Error::Network(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

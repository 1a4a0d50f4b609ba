use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate node id `{0}`")]
    Duplicate(String),
    #[error("unknown node id `{0}`")]
    Reference(String),
    #[error("cycle detected through node `{0}`")]
    Cycle(String),
    #[error("invalid format: {0}")]
    Format(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::Parse { .. }
            | Error::Duplicate(_)
            | Error::Reference(_)
            | Error::Cycle(_)
            | Error::Format(_) => 3,
            Error::Config(_) => 4,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulator.
///
/// The variants line up with the process exit codes used by the command line
/// front end, see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical procedure broke down.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A hard size limit was exceeded.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// The experiment could not produce a result.
    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A persisted file could not be parsed.
    #[error("malformed file {path}, line {line}: {msg}")]
    Format { path: PathBuf, line: usize, msg: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 config, 3 numeric, 4 capacity, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::Numeric(_) => 3,
            Error::Capacity(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: empty scenario")]
    EmptyScenario { path: String },

    #[error("{path}: line {line} column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Compute(#[from] qlbn_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 for bad input, 3 for a computation that has no answer, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        use qlbn_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::EmptyScenario { .. } | CliError::Parse { .. } | CliError::Invalid(_) => 2,
            CliError::Compute(
                E::UnreachableTarget { .. }
                | E::DegenerateInterference(_)
                | E::ImpossibleEvidence
                | E::NoConvergence(_)
                | E::NoClassicalSupport(_),
            ) => 3,
            CliError::Compute(_) => 2,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

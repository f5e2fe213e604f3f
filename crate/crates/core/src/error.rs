use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: hearing {hearing}: field `{field}`: {message}")]
    Invalid {
        line: usize,
        hearing: String,
        field: String,
        message: String,
    },

    #[error("duplicate hearing id `{0}`")]
    DuplicateHearing(String),

    #[error("legislator `{0}` has no committee hearings")]
    NoCommitteeHearings(String),

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("registry is empty but the comment has organization slots")]
    EmptyRegistry,

    #[error("no single-organization comments available as templates")]
    NoSingleSlotComments,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Process exit status for this error: 2 for internal invariant
    /// failures, 1 for everything caused by the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 2,
            _ => 1,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("corrupt inverted index: position {position} claimed by both {first:?} and {second:?}")]
    CorruptIndex {
        position: usize,
        first: String,
        second: String,
    },

    #[error("baseline record {paper_id} is dated {date}, outside 1666..=1900")]
    BaselineDate { paper_id: String, date: String },

    #[error("seed stop and removal lists overlap on {0:?}")]
    OverlappingSeeds(Vec<String>),

    #[error("stream is not in order: {next} follows {prev}")]
    UnsortedStream { prev: String, next: String },

    #[error("second pass does not match the counted stream: {0}")]
    StreamMismatch(String),

    #[error("vector dimension mismatch at {location}: expected {expected}, found {found}")]
    Dimension {
        location: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("stage `{stage}` needs {artifact}, which is missing; run stage `{producer}` first")]
    MissingArtifact {
        stage: String,
        artifact: String,
        producer: String,
    },

    #[error("configuration changed since artifacts in {0} were written; rerun with --force")]
    ConfigMismatch(PathBuf),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ConfigMismatch(_) => 1,
            Error::Internal(_) => 3,
            _ => 2,
        }
    }
}

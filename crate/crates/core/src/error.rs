use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {msg}")]
    Malformed { file: String, line: usize, msg: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("category `{child}` references missing or invalid parent `{parent}`")]
    OrphanParent { child: String, parent: String },

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("unknown activity `{0}`")]
    UnknownActivity(String),

    #[error("unknown venue `{0}`")]
    UnknownVenue(String),

    #[error("no needs observed for activity `{0}`")]
    NoNeeds(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("suggestion source: {0}")]
    Source(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(file: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Malformed {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }
}

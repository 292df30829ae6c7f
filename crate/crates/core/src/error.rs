use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("invalid span {start}..{end} (text length {len})")]
    InvalidSpan { start: usize, end: usize, len: usize },

    #[error("line {line}: malformed annotation: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("entity {id}: surface `{found}` does not match text `{expected}` at its offsets")]
    OffsetMismatch {
        id: String,
        expected: String,
        found: String,
    },

    #[error("relation {relation} references missing entity {target}")]
    DanglingReference { relation: String, target: String },

    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),

    #[error("invalid relation {id}: {reason}")]
    InvalidRelation { id: String, reason: String },

    #[error("entities {0} and {1} overlap")]
    OverlappingEntities(String, String),

    #[error("cycle in Next edges: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),

    #[error("document mismatch: {0}")]
    DocumentMismatch(String),

    #[error("annotators disagree on the text of document {0}")]
    TextMismatch(String),

    #[error("document {0} has no annotations to pass through")]
    NoAnnotations(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: missing sibling .txt file")]
    MissingText { path: PathBuf },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_file(path: impl Into<PathBuf>, source: Error) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(source),
        }
    }
}

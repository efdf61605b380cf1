use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("encoding: {path} is not valid UTF-8")]
    Encoding { path: PathBuf },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid alignment for {pair_id}: {message}")]
    InvalidAlignment { pair_id: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid pattern {pattern:?}: {source}")]
    Pattern {
        pattern: String,
        #[source]
        source: regex::Error,
    },
    #[error("dimension mismatch ({0} vs {1})")]
    Dimension(usize, usize),
    #[error("translation count mismatch ({expected} vs {actual})")]
    TranslationCount { expected: usize, actual: usize },
    #[error("external command `{command}` failed: {message}")]
    Command { command: String, message: String },
    #[error("missing translation: {0}")]
    MissingTranslation(String),
    #[error("language mismatch: {0}")]
    Language(String),
    #[error("pair id mismatch: {0} vs {1}")]
    PairMismatch(String, String),
    #[error("unknown pair {0}")]
    UnknownPair(String),
    #[error("document {0} is already consumed")]
    Consumed(String),
    #[error("review error: {0}")]
    Review(String),
    #[error("volume unreachable: {0}")]
    VolumeUnreachable(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

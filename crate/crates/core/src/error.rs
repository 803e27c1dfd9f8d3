use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed delimited file {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("no valid rows in {0}")]
    NoValidRows(PathBuf),

    #[error("confusion score {0} outside [1, 7]")]
    ScoreOutOfRange(f64),

    #[error("missing lexicon category file for `{0}`")]
    MissingCategory(String),

    #[error("lexicon `{0}` has no entries")]
    EmptyLexicon(String),

    #[error("invalid lexicon entry in `{category}`: {entry:?}")]
    InvalidLexiconEntry { category: String, entry: String },

    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("feature matrix: {0}")]
    Matrix(String),

    #[error("type-token ratio is undefined for an empty token list")]
    UndefinedTtr,

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-finite statistic: {0}")]
    NonFinite(f64),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported model format version {0}")]
    FormatVersion(u64),

    #[error("model file corrupted: {0}")]
    Corrupted(String),

    #[error("fold {fold} failed: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("post {id}: {source}")]
    Post {
        id: String,
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

    /// Whether the error stems from user input (bad files, flags, upstream
    /// artifacts) rather than an internal failure. The CLI maps this onto
    /// exit code 2.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::Json(_)
            | Error::Manifest(_)
            | Error::NoValidRows(_)
            | Error::ScoreOutOfRange(_)
            | Error::MissingCategory(_)
            | Error::EmptyLexicon(_)
            | Error::InvalidLexiconEntry { .. }
            | Error::SchemaMismatch { .. }
            | Error::UnknownFeature(_)
            | Error::Matrix(_)
            | Error::FormatVersion(_)
            | Error::Corrupted(_)
            | Error::InvalidParameter(_)
            | Error::SingleClass
            | Error::InsufficientData(_) => true,
            Error::Fold { source, .. } | Error::Post { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

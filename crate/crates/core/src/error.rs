use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Stream(#[from] io::Error),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("model file {path}: {reason}")]
    Model { path: PathBuf, reason: String },

    #[error("empty vocabulary: {0}")]
    EmptyVocabulary(String),

    #[error("corpus too small: {0}")]
    CorpusTooSmall(String),

    #[error("word set `{set}` has no words in the vocabulary of `{region}`")]
    NoWordsInVocab { set: String, region: String },

    #[error("degenerate gender axis in `{0}`: female and male vectors coincide")]
    DegenerateAxis(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("missing from affect lexicon: {0:?}")]
    AffectCoverage(Vec<String>),

    #[error("invalid synthetic spec: {0}")]
    Spec(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn model(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Model {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at {locator}: {message}")]
    MalformedRecord { locator: String, message: String },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("category `{category}` has {available} documents, {requested} requested")]
    CategoryTooSmall {
        category: String,
        available: usize,
        requested: usize,
    },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("term `{0}` does not occur in the index")]
    UnknownTerm(String),

    #[error("document ordinal {0} is out of range")]
    InvalidDocument(usize),

    #[error("no seed documents are assigned; nothing to vote with")]
    NoSeeds,

    #[error("corpus is unlabeled")]
    Unlabeled,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("requested {k} clusters for {n} points")]
    TooManyClusters { k: usize, n: usize },

    #[error("run {run} (seed {seed}) failed")]
    Run {
        run: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

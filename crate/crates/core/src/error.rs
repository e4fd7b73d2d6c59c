use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("target length {target} is shorter than the seed ({seed_len} elements)")]
    TargetTooShort { target: usize, seed_len: usize },

    #[error("term would exceed the 2^62 limit after {len} terms (next candidate {candidate})")]
    Overflow { len: usize, candidate: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-positive term a_{k} = {value}; logarithm undefined")]
    NonPositiveTerm { k: u64, value: u64 },

    #[error("window w = {window} needs at least {needed} terms, sequence has {len}")]
    WindowOutOfBounds {
        window: usize,
        needed: usize,
        len: usize,
    },

    #[error("smoothing window length must be odd and positive, got {0}")]
    EvenWindow(usize),

    #[error("index {index} is not a local maximum")]
    NotLocalMaximum { index: usize },

    #[error("k = {k} is outside the domain of series '{label}'")]
    KOutOfDomain { k: u64, label: String },

    #[error("{needed} points required for this fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error(
        "design matrix is rank-deficient or near-singular (condition estimate {condition:.3e}); \
         supply more well-separated points or fix A"
    )]
    SingularDesign { condition: f64 },

    #[error("invariant failure: {0}")]
    Invariant(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("checksum mismatch for {path}: sidecar records {expected}, file hashes to {actual}")]
    Checksum {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("figure '{figure}': {message}")]
    Figure { figure: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

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

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

use alloc::string::String;

/// Errors produced by the selection pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("no in-vocabulary tokens")]
    NoInVocabularyTokens,

    #[error("no token has an embedding")]
    NoEmbeddedTokens,

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what}: need {needed}, have {available}")]
    Insufficient {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("kernel matrix is not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("non-finite value for feature `{feature}` of example `{example}`")]
    NonFiniteFeature { example: String, feature: String },

    #[error("feature configuration mismatch: weights use `{expected}`, setting uses `{found}`")]
    ConfigMismatch { expected: String, found: String },

    #[error("evaluator failed: {0}")]
    Evaluator(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not enough data: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("predictor column {0} is constant")]
    ConstantPredictor(usize),

    #[error("singular design matrix")]
    Singular,

    #[error("statistic undefined: {0}")]
    Undefined(&'static str),

    #[error("unknown {kind} key `{key}` in record {record}")]
    UnknownKey {
        kind: &'static str,
        key: String,
        record: String,
    },

    #[error("missing relevance labels for {} references: {}", .0.len(), .0.join(", "))]
    MissingRelevance(Vec<String>),

    #[error("unknown field kind `{0}`")]
    UnknownFieldKind(String),

    #[error("parse failure: {reason}")]
    Parse { reason: &'static str, raw: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

use thiserror::Error;

use crate::set::TagId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty collection")]
    EmptyCollection,

    #[error("duplicate resource identifier `{0}`")]
    DuplicateResource(String),

    #[error("empty tag label on resource `{0}`")]
    EmptyTagLabel(String),

    #[error("unknown tag id {0}")]
    UnknownTag(TagId),

    #[error("unknown tag label `{0}`")]
    UnknownTagLabel(String),

    #[error("tag {0} is not selectable in the current state")]
    NotSelectable(TagId),

    #[error("tag {0} is not active in the current state")]
    NotActive(TagId),

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("action {index} of the trace is invalid: {source}")]
    CorruptTrace {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("too few non-zero differences: {found} (need at least {needed})")]
    TooFewDifferences { found: usize, needed: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("strategies disagree on the browsing state at step {step} of seed {seed}")]
    DigestMismatch { seed: u64, step: usize },

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use layout_seq::SeqError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    /// An attribute index falls outside its embedding table.
    #[error("embedding index out of range: {0}")]
    Embedding(String),

    /// A generator or encoder input exceeds the configured capacity.
    #[error("sequence of {len} items exceeds capacity {max}")]
    Capacity { len: usize, max: usize },

    /// Substep 2 ran without any selectable condition.
    #[error("selection requested but no unsatisfied condition is eligible")]
    Selection,

    /// The input sequence is not a valid (prefix of a) serialization.
    #[error(transparent)]
    Malformed(#[from] SeqError),

    /// Checkpoint parsing/shape problems.
    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

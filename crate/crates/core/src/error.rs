use thiserror::Error;

/// Errors produced by the core layout types.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A box falls outside the canvas by more than the one-bin clamping
    /// tolerance, or has a non-positive extent.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// A type name is not present in the vocabulary.
    #[error("unknown element type `{0}`")]
    UnknownType(String),

    /// A vocabulary definition breaks its own invariants.
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),

    /// The layout JSON does not match the schema.
    #[error("layout schema mismatch at {pointer}: {message}")]
    SchemaMismatch { pointer: String, message: String },

    /// Underlying I/O failure while reading or writing a layout file.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Underlying JSON syntax failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// The rule a tree violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationRule {
    /// A node with children carries a leaf-kind type.
    KindMismatch,
    /// A type index outside the vocabulary.
    TypeOutOfRange,
    /// A bin index outside the grid.
    GeometryOutOfRange,
}

/// One invariant violation found by [`crate::validate_tree`].
///
/// Violations are data, not errors: validation never fails, it reports.
#[derive(Debug, Clone)]
pub struct Violation {
    /// Path from the root as child indices (empty = root itself).
    pub path: Vec<usize>,
    pub rule: ViolationRule,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let path: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(f, "[{}] {:?}: {}", path.join("."), self.rule, self.message)
    }
}

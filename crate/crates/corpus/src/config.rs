use layout_core::{QuantGrid, TypeVocabulary};
use std::sync::Arc;

/// Corpus-wide settings: size caps, shared vocabulary and grid, the
/// train/test split ratio, and the seed all corpus randomness derives from.
#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub max_nodes: usize,
    pub max_depth: usize,
    pub vocabulary: Arc<TypeVocabulary>,
    pub grid: Arc<QuantGrid>,
    /// `(train, test)` proportions; 9:1 by default.
    pub split_ratio: (u32, u32),
    pub seed: u64,
}

impl CorpusConfig {
    pub fn synthetic_defaults(seed: u64) -> Self {
        Self {
            max_nodes: 30,
            max_depth: 5,
            vocabulary: Arc::new(TypeVocabulary::synthetic()),
            grid: Arc::new(QuantGrid::default64()),
            split_ratio: (9, 1),
            seed,
        }
    }

    pub fn with_vocabulary(mut self, vocabulary: Arc<TypeVocabulary>) -> Self {
        self.vocabulary = vocabulary;
        self
    }
}

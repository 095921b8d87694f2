use layout_core::{QuantGrid, TypeVocabulary};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_model: usize,
    pub d_ff: usize,
    /// Layers of the conditional layout generator.
    pub gen_layers: usize,
    /// Layers of the structure and context encoders.
    pub enc_layers: usize,
    /// Width of the structure latent.
    pub d_z: usize,
    pub heads: usize,
    /// Longest supported serialized sequence (items, including separators).
    pub max_seq: usize,
    /// Ablation switch: parent/sibling features of the context encoder.
    pub use_local_context: bool,
    /// Ablation switch: the pooled full-prefix feature of the context encoder.
    pub use_global_context: bool,
}

impl ModelConfig {
    /// Full-scale defaults: 512-d embeddings, 2048-d feed-forward, a 6-layer
    /// generator and 4-layer encoders.
    pub fn full() -> Self {
        Self {
            d_model: 512,
            d_ff: 2048,
            gen_layers: 6,
            enc_layers: 4,
            d_z: 64,
            heads: 8,
            max_seq: 96,
            use_local_context: true,
            use_global_context: true,
        }
    }

    /// Desk-scale defaults used by the synthetic-corpus training runs.
    pub fn desk() -> Self {
        Self {
            d_model: 128,
            d_ff: 512,
            gen_layers: 2,
            enc_layers: 2,
            d_z: 16,
            heads: 4,
            max_seq: 72,
            use_local_context: true,
            use_global_context: true,
        }
    }

    /// Tiny configuration for gradient checks.
    pub fn tiny() -> Self {
        Self {
            d_model: 8,
            d_ff: 16,
            gen_layers: 1,
            enc_layers: 1,
            d_z: 4,
            heads: 2,
            max_seq: 48,
            use_local_context: true,
            use_global_context: true,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.d_model % self.heads != 0 {
            return Err(format!("d_model {} not divisible by heads {}", self.d_model, self.heads));
        }
        if self.d_z > self.d_model {
            return Err(format!("d_z {} exceeds d_model {}", self.d_z, self.d_model));
        }
        if self.gen_layers == 0 || self.enc_layers == 0 {
            return Err("layer counts must be positive".into());
        }
        Ok(())
    }
}

/// The categorical space the model operates over: vocabulary and bin grid.
#[derive(Debug, Clone)]
pub struct LayoutSpace {
    pub vocabulary: Arc<TypeVocabulary>,
    pub grid: Arc<QuantGrid>,
}

impl LayoutSpace {
    pub fn new(vocabulary: Arc<TypeVocabulary>, grid: Arc<QuantGrid>) -> Self {
        Self { vocabulary, grid }
    }

    /// Bin counts in attribute order `x, y, w, h`.
    pub fn bins(&self) -> [usize; 4] {
        [
            self.grid.bins_x as usize,
            self.grid.bins_y as usize,
            self.grid.bins_w as usize,
            self.grid.bins_h as usize,
        ]
    }

    pub fn n_types(&self) -> usize {
        self.vocabulary.len()
    }
}

//! The neural components of the conditional structured-layout generator: a
//! structure encoder (Transformer-VAE over leaf-pruned sequences), a context
//! encoder (parent/sibling FC features plus a pooled causal Transformer over
//! the emitted prefix), and the conditional layout generator (a Transformer
//! over condition tokens, a structure code, and per-round context tokens,
//! wired by role-specific attention masks).
//!
//! Everything runs on an in-crate `f64` reverse-mode autodiff tape (see
//! [`nn`]), so training, finite-difference checks, and inference share one
//! numerical path.

pub mod checkpoint;
mod config;
mod context;
mod embed;
mod error;
mod generator;
pub mod masks;
mod model;
pub mod nn;
mod sampling;
mod state;
mod structure;

pub use config::{LayoutSpace, ModelConfig};
pub use context::{context_codes, RoundContext};
pub use embed::{EmbedRow, NodeEmbedder};
pub use error::ModelError;
pub use generator::{attr_logits, generator_forward, generator_pass, PassIndex, RoundTokens};
pub use model::{ContextParams, GeneratorParams, Heads, Model, StructureEncoderParams};
pub use sampling::{sample_binary, sample_categorical, sample_from_probs, DecodeMode, DecodeOptions};
pub use state::GenerationState;
pub use structure::{encode_structure, encode_structure_on_tape, StructureCode};

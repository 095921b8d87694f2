//! Corpus handling: ingestion of layout JSON directories, a synthetic
//! structured-layout grammar for desk-scale training, deterministic splits,
//! condition-set recipes for the generation tasks, and corpus perturbations
//! used by discrimination checks.

mod conditions;
mod config;
mod grammar;
mod ingest;
mod perturb;
pub mod rico;
mod split;

pub use conditions::make_condition_set;
pub use config::CorpusConfig;
pub use grammar::{generate_synthetic, SyntheticGrammarSpec};
pub use ingest::{ingest_rico_like, IngestError, IngestReport};
pub use perturb::shuffle_leaf_types;
pub use split::split;

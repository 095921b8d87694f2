//! The inference harness: autoregressive structured-layout generation under
//! condition sets and structure codes, the seven task recipes, and repair of
//! malformed generated sequences.

mod generate;
mod repair;
mod request;
mod run;

pub use generate::{generate, CondReport, GenerationResult};
pub use repair::{repair_sequence, RepairEntry};
pub use request::{
    load_layout, AttrSpec, ConditionsSpec, DecodeSpec, ResultReport, TaskRequestFile,
};
pub use run::{run_task, TaskInputs, STRUCT_EXTR_ITERATIONS};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("invalid conditions: {0}")]
    InvalidConditions(String),
    #[error("this task needs a source layout to derive conditions from")]
    MissingSource,
    #[error("structure transfer needs a reference layout")]
    MissingReference,
    #[error("generation produced nothing repairable")]
    EmptyGeneration,
    #[error(transparent)]
    Model(#[from] layout_model::ModelError),
    #[error(transparent)]
    Seq(#[from] layout_seq::SeqError),
    #[error("layout: {0}")]
    Layout(#[from] layout_core::CoreError),
}

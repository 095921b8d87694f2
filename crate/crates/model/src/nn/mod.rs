//! Minimal reverse-mode autodiff and the Transformer building blocks built
//! on it. Everything is `f64`.

mod params;
mod tape;
mod transformer;

pub use params::{GradStore, ParamId, ParamStore};
pub use tape::{Tape, Var};
pub use transformer::{LayerParams, LinearParams, MlpParams, StackParams};

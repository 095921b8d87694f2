//! Evaluation metrics for structured layouts.
//!
//! Element metrics (computed over a layout's visible elements):
//! - [`align_score`]: mean `-log(1 - d)` of nearest edge-alignment distances,
//! - [`overlap_score`]: total pairwise intersection over total area,
//! - [`wasserstein_label`] / [`wasserstein_box`]: distributional distances
//!   between two corpora (leaf labels / leaf boxes).
//!
//! Structure metrics (computed over a layout's local structures):
//! - [`s_align`] / [`s_overlap`]: the element scores averaged over sibling
//!   sets,
//! - [`s_inclusion`]: mean parent∩child over child area across parent-child
//!   pairs,
//! - the `pairs = true` variants of the Wasserstein metrics over
//!   (parent, child) label pairs and concatenated box pairs.
//!
//! [`baseline_extract_structure`] reproduces the post-processing used to give
//! flat generators an implicit structure: each element is attached to the
//! strictly larger internal box that covers it most.
//!
//! The [`exact`] module carries a small exact optimal-transport solver; it is
//! the oracle path used to validate both Wasserstein implementations on small
//! inputs.

mod baseline;
mod boxes;
mod element;
pub mod exact;
pub mod sliced;
mod structure;
mod wasserstein;

pub use baseline::baseline_extract_structure;
pub use boxes::{leaf_boxes, node_boxes, parent_child_pairs, sibling_sets, Box2, TypedBox};
pub use element::{align_score, overlap_score};
pub use structure::{s_align, s_inclusion, s_inclusion_detailed, s_overlap, InclusionDetail};
pub use wasserstein::{wasserstein_box, wasserstein_label, BOX_PROJECTIONS, SLICE_SEED};

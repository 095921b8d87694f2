//! Canonical layout-tree data model shared by the whole workspace.
//!
//! A structured layout is a tree of typed, axis-aligned boxes. Geometry is
//! quantized onto a configurable bin grid so that downstream models can treat
//! every attribute as categorical. This crate owns:
//!
//! - [`TypeVocabulary`]: the element-type alphabet (leaf vs. internal kinds),
//!   with presets for the RICO and WebForest datasets plus a synthetic preset.
//! - [`QuantGrid`]: the bin grid and the quantize/dequantize maps.
//! - [`LayoutNode`] / [`LayoutTree`]: the hierarchy itself, plus validation.
//! - The on-disk layout JSON schema (boxes in layout units, pre-quantization).
//! - Condition-set and task-kind domain types used by conditional generation.
//!
//! All types are immutable after construction and safe to share across threads.

mod condition;
mod error;
mod grid;
mod json;
mod tree;
mod vocab;

pub use condition::{AttrCondition, ConditionSet, TaskKind, MASKED};
pub use error::{CoreError, Violation, ViolationRule};
pub use grid::QuantGrid;
pub use json::{layout_from_json, layout_to_json, parse_raw_layout, read_layout_file, write_layout_file, RawLayout, RawNode};
pub use tree::{validate_tree, LayoutNode, LayoutTree};
pub use vocab::{TypeEntry, TypeKind, TypeVocabulary};

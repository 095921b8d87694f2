//! Layout sequences: the serialization scheme that turns a layout tree into a
//! flat token sequence and back.
//!
//! A tree is written level by level. Within a level, nodes appear grouped by
//! parent, in the parents' order, so the tree can be recovered uniquely by
//! replaying a queue of pending parents. Each node carries two binary flags:
//! `leaf` (it contributed no children) and `last_child` (it closes its
//! parent's group; the root always carries it). Adjacent levels are separated
//! by a level-separator token.
//!
//! Besides serialize/deserialize this crate provides the structure-sequence
//! extraction used by the structure encoder (drop leaf nodes, recompute the
//! flags, collapse emptied levels) and mid-generation parent lookup on
//! sequence prefixes.

mod replay;
mod sample;
mod serdes;
mod types;

pub use replay::{parent_index_of, validate_prefix, validate_sequence, Replay};
pub use sample::random_tree;
pub use serdes::{deserialize, extract_structure_sequence, position_paths, serialize};
pub use types::{MalformedReason, SeqError, SeqItem, SeqNode, TokenSequence};

use crate::{align_score, overlap_score, parent_child_pairs, sibling_sets};
use layout_core::LayoutTree;

/// Mean alignment score over all sibling sets (singleton sets contribute 0;
/// a tree without sibling sets scores 0).
pub fn s_align(tree: &LayoutTree) -> f64 {
    mean_over_sets(tree, align_score)
}

/// Mean overlap score over all sibling sets.
pub fn s_overlap(tree: &LayoutTree) -> f64 {
    mean_over_sets(tree, overlap_score)
}

fn mean_over_sets(tree: &LayoutTree, f: impl Fn(&[crate::Box2]) -> f64) -> f64 {
    let sets = sibling_sets(tree);
    if sets.is_empty() {
        return 0.0;
    }
    sets.iter().map(|s| f(s)).sum::<f64>() / sets.len() as f64
}

/// Inclusion detail: the mean score plus how many pairs were skipped because
/// the child had zero area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InclusionDetail {
    pub mean: f64,
    pub pairs: usize,
    pub skipped: usize,
}

/// Mean of `area(parent ∩ child) / area(child)` over all parent-child pairs.
///
/// Trees without any pair score 1 by convention; zero-area children are
/// skipped (see [`s_inclusion_detailed`] for the count).
pub fn s_inclusion(tree: &LayoutTree) -> f64 {
    s_inclusion_detailed(tree).mean
}

pub fn s_inclusion_detailed(tree: &LayoutTree) -> InclusionDetail {
    let pairs = parent_child_pairs(tree);
    let mut total = 0.0;
    let mut counted = 0usize;
    let mut skipped = 0usize;
    for (parent, child) in &pairs {
        let ca = child.box_.area();
        if ca <= 0.0 {
            skipped += 1;
            continue;
        }
        total += parent.box_.intersection_area(&child.box_) / ca;
        counted += 1;
    }
    let mean = if counted == 0 { 1.0 } else { total / counted as f64 };
    InclusionDetail { mean, pairs: pairs.len(), skipped }
}

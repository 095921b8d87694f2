use crate::boxes::{leaf_boxes, parent_child_pairs};
use crate::sliced;
use layout_core::LayoutTree;
use std::collections::HashMap;

/// Seed of the fixed projection set used by [`wasserstein_box`].
pub const SLICE_SEED: u64 = 0x51ce_d001;

/// Number of projection directions used by [`wasserstein_box`].
pub const BOX_PROJECTIONS: usize = 128;

/// Wasserstein distance between categorical label distributions of two
/// corpora under the discrete 0/1 ground metric, which equals the total
/// variation distance `0.5 * L1`.
///
/// With `pairs = false` the distribution is over visible-element labels; with
/// `pairs = true` it is over `(parent label, child label)` pairs of all
/// edges. Returns the raw (unscaled) value; reports conventionally show the
/// pair variant times 100. Empty corpora score 0.
pub fn wasserstein_label(a: &[LayoutTree], b: &[LayoutTree], pairs: bool) -> f64 {
    let da = label_distribution(a, pairs);
    let db = label_distribution(b, pairs);
    if da.is_empty() || db.is_empty() {
        return 0.0;
    }
    let mut keys: Vec<(u16, u16)> = da.keys().chain(db.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let mut l1 = 0.0;
    for k in keys {
        l1 += (da.get(&k).copied().unwrap_or(0.0) - db.get(&k).copied().unwrap_or(0.0)).abs();
    }
    0.5 * l1
}

fn label_distribution(corpus: &[LayoutTree], pairs: bool) -> HashMap<(u16, u16), f64> {
    let mut counts: HashMap<(u16, u16), f64> = HashMap::new();
    let mut total = 0.0;
    for tree in corpus {
        if pairs {
            for (p, c) in parent_child_pairs(tree) {
                *counts.entry((p.t, c.t)).or_insert(0.0) += 1.0;
                total += 1.0;
            }
        } else {
            for tb in leaf_boxes(tree) {
                *counts.entry((tb.t, 0)).or_insert(0.0) += 1.0;
                total += 1.0;
            }
        }
    }
    if total > 0.0 {
        for v in counts.values_mut() {
            *v /= total;
        }
    }
    counts
}

/// Sliced Wasserstein-1 between box distributions of two corpora.
///
/// With `pairs = false` the clouds are visible-element boxes in R^4; with
/// `pairs = true` they are concatenated (parent, child) boxes in R^8. All
/// coordinates are normalized to the unit canvas. The projection set is fixed
/// (see [`SLICE_SEED`], [`BOX_PROJECTIONS`]), so the estimator is
/// deterministic. Empty corpora score 0.
pub fn wasserstein_box(a: &[LayoutTree], b: &[LayoutTree], pairs: bool) -> f64 {
    let ca = box_cloud(a, pairs);
    let cb = box_cloud(b, pairs);
    if ca.is_empty() || cb.is_empty() {
        return 0.0;
    }
    let dim = if pairs { 8 } else { 4 };
    let dirs = sliced::directions(dim, BOX_PROJECTIONS, SLICE_SEED);
    sliced::sliced_w1(&ca, &cb, &dirs)
}

fn box_cloud(corpus: &[LayoutTree], pairs: bool) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for tree in corpus {
        if pairs {
            for (p, c) in parent_child_pairs(tree) {
                out.push(vec![
                    p.box_.x, p.box_.y, p.box_.w, p.box_.h, c.box_.x, c.box_.y, c.box_.w, c.box_.h,
                ]);
            }
        } else {
            for tb in leaf_boxes(tree) {
                out.push(vec![tb.box_.x, tb.box_.y, tb.box_.w, tb.box_.h]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use layout_core::{LayoutNode, LayoutTree, QuantGrid, TypeVocabulary};
    use std::sync::Arc;

    fn leafy_tree(t: u16) -> LayoutTree {
        LayoutTree::new(
            LayoutNode::internal([0, 0, 63, 63], 0, vec![LayoutNode::leaf([1, 1, 10, 10], t)]),
            Arc::new(TypeVocabulary::synthetic()),
            Arc::new(QuantGrid::default64()),
        )
    }

    #[test]
    fn corpus_against_itself_is_zero() {
        let corpus = vec![leafy_tree(5), leafy_tree(6)];
        assert_eq!(wasserstein_label(&corpus, &corpus, false), 0.0);
        assert_eq!(wasserstein_label(&corpus, &corpus, true), 0.0);
        assert_eq!(wasserstein_box(&corpus, &corpus, false), 0.0);
        assert_eq!(wasserstein_box(&corpus, &corpus, true), 0.0);
    }

    #[test]
    fn disjoint_label_distributions_score_one() {
        let a = vec![leafy_tree(5)];
        let b = vec![leafy_tree(6)];
        assert!((wasserstein_label(&a, &b, false) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus_scores_zero() {
        let a = vec![leafy_tree(5)];
        assert_eq!(wasserstein_label(&a, &[], false), 0.0);
        assert_eq!(wasserstein_box(&[], &a, true), 0.0);
    }

    #[test]
    fn symmetry() {
        let a = vec![leafy_tree(5), leafy_tree(7)];
        let b = vec![leafy_tree(6), leafy_tree(7)];
        assert_eq!(wasserstein_label(&a, &b, true), wasserstein_label(&b, &a, true));
        assert_eq!(wasserstein_box(&a, &b, false), wasserstein_box(&b, &a, false));
    }
}

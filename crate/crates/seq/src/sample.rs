use layout_core::{LayoutNode, LayoutTree, QuantGrid, TypeVocabulary};
use rand::Rng;
use std::sync::Arc;

/// Draw a random valid layout tree with at most `max_nodes` nodes and depth
/// at most `max_depth`.
///
/// Shapes, types, and geometry are sampled independently; geometry is
/// unconstrained apart from being inside the grid, so the sampler covers the
/// full sequence alphabet (it is meant for round-trip and property checks,
/// not for realistic layouts: the synthetic corpus grammar handles those).
pub fn random_tree<R: Rng>(
    rng: &mut R,
    vocabulary: &Arc<TypeVocabulary>,
    grid: &Arc<QuantGrid>,
    max_nodes: usize,
    max_depth: usize,
) -> LayoutTree {
    assert!(max_nodes >= 1 && max_depth >= 1);
    let leaves: Vec<u16> = (0..vocabulary.len() as u16).filter(|&i| vocabulary.is_leaf(i)).collect();
    let internals: Vec<u16> =
        (0..vocabulary.len() as u16).filter(|&i| vocabulary.is_internal(i)).collect();

    let mut budget = rng.gen_range(1..=max_nodes);

    fn grow<R: Rng>(
        rng: &mut R,
        grid: &QuantGrid,
        leaves: &[u16],
        internals: &[u16],
        budget: &mut usize,
        depth_left: usize,
    ) -> LayoutNode {
        *budget -= 1;
        let box_ = [
            rng.gen_range(0..grid.bins_x),
            rng.gen_range(0..grid.bins_y),
            rng.gen_range(0..grid.bins_w),
            rng.gen_range(0..grid.bins_h),
        ];
        let make_leaf = depth_left <= 1 || *budget == 0 || rng.gen_bool(0.35);
        if make_leaf {
            LayoutNode::leaf(box_, leaves[rng.gen_range(0..leaves.len())])
        } else {
            let max_children = (*budget).min(4);
            let n_children = rng.gen_range(1..=max_children);
            let mut children = Vec::with_capacity(n_children);
            for _ in 0..n_children {
                if *budget == 0 {
                    break;
                }
                children.push(grow(rng, grid, leaves, internals, budget, depth_left - 1));
            }
            if children.is_empty() {
                LayoutNode::leaf(box_, leaves[rng.gen_range(0..leaves.len())])
            } else {
                LayoutNode::internal(box_, internals[rng.gen_range(0..internals.len())], children)
            }
        }
    }

    let root = grow(rng, grid, &leaves, &internals, &mut budget, max_depth);
    LayoutTree::new(root, vocabulary.clone(), grid.clone())
}

use layout_core::{LayoutNode, LayoutTree};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Destroy parent-child label structure while preserving everything else.
///
/// All visible-element labels across the corpus are pooled and redistributed
/// by a seeded permutation, so the marginal label distribution is exactly
/// preserved but the (parent, child) pair distribution decorrelates. Used as
/// the negative control in structure-metric discrimination checks.
pub fn shuffle_leaf_types(corpus: &[LayoutTree], seed: u64) -> Vec<LayoutTree> {
    let mut labels: Vec<u16> = Vec::new();
    for tree in corpus {
        tree.visit(|node, _| {
            if node.children.is_empty() && tree.vocabulary.is_leaf(node.t) {
                labels.push(node.t);
            }
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0e11_5fae);
    labels.shuffle(&mut rng);

    let mut cursor = 0usize;
    corpus
        .iter()
        .map(|tree| {
            fn rebuild(
                node: &LayoutNode,
                tree: &LayoutTree,
                labels: &[u16],
                cursor: &mut usize,
            ) -> LayoutNode {
                let t = if node.children.is_empty() && tree.vocabulary.is_leaf(node.t) {
                    let t = labels[*cursor];
                    *cursor += 1;
                    t
                } else {
                    node.t
                };
                LayoutNode {
                    t,
                    children: node
                        .children
                        .iter()
                        .map(|c| rebuild(c, tree, labels, cursor))
                        .collect(),
                    ..*node
                }
            }
            let root = rebuild(&tree.root, tree, &labels, &mut cursor);
            LayoutTree::new(root, tree.vocabulary.clone(), tree.grid.clone())
        })
        .collect()
}

use crate::{QuantGrid, TypeVocabulary, Violation, ViolationRule};
use std::sync::Arc;

/// One node of a layout tree: a quantized box, a type index, and children.
///
/// Node ownership makes aliasing and cycles unrepresentable, so tree
/// acyclicity holds by construction and is not re-checked at runtime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutNode {
    pub x: u16,
    pub y: u16,
    pub w: u16,
    pub h: u16,
    /// Index into the tree's [`TypeVocabulary`].
    pub t: u16,
    pub children: Vec<LayoutNode>,
}

impl LayoutNode {
    pub fn leaf(box_: [u16; 4], t: u16) -> Self {
        Self { x: box_[0], y: box_[1], w: box_[2], h: box_[3], t, children: Vec::new() }
    }

    pub fn internal(box_: [u16; 4], t: u16, children: Vec<LayoutNode>) -> Self {
        Self { x: box_[0], y: box_[1], w: box_[2], h: box_[3], t, children }
    }

    pub fn quantized_box(&self) -> [u16; 4] {
        [self.x, self.y, self.w, self.h]
    }

    /// Total node count of the subtree rooted here.
    pub fn count(&self) -> usize {
        1 + self.children.iter().map(LayoutNode::count).sum::<usize>()
    }

    /// Depth of the subtree rooted here (a single node has depth 1).
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(LayoutNode::depth).max().unwrap_or(0)
    }
}

/// A complete structured layout: a root node plus the shared vocabulary and
/// quantization grid its attributes refer to.
#[derive(Debug, Clone)]
pub struct LayoutTree {
    pub root: LayoutNode,
    pub vocabulary: Arc<TypeVocabulary>,
    pub grid: Arc<QuantGrid>,
}

impl LayoutTree {
    pub fn new(root: LayoutNode, vocabulary: Arc<TypeVocabulary>, grid: Arc<QuantGrid>) -> Self {
        Self { root, vocabulary, grid }
    }

    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Look a node up by its path of child indices (empty path = root).
    pub fn node_at(&self, path: &[usize]) -> Option<&LayoutNode> {
        let mut node = &self.root;
        for &i in path {
            node = node.children.get(i)?;
        }
        Some(node)
    }

    /// Visit every node with its path, parent-first.
    pub fn visit<F: FnMut(&LayoutNode, &[usize])>(&self, mut f: F) {
        fn go<F: FnMut(&LayoutNode, &[usize])>(n: &LayoutNode, path: &mut Vec<usize>, f: &mut F) {
            f(n, path);
            for (i, c) in n.children.iter().enumerate() {
                path.push(i);
                go(c, path, f);
                path.pop();
            }
        }
        go(&self.root, &mut Vec::new(), &mut f);
    }
}

/// Check every node against the tree invariants and return the violations.
///
/// An empty result means the tree is accepted everywhere else in the
/// workspace (serialization in particular). Violations are returned, never
/// thrown: a caller decides whether they are fatal.
///
/// Checked rules:
/// - a node with children must carry an internal-kind type (childless nodes
///   may carry either kind: empty containers are accepted on ingest);
/// - every type index is inside the vocabulary;
/// - every bin index is inside the grid.
pub fn validate_tree(tree: &LayoutTree) -> Vec<Violation> {
    let mut out = Vec::new();
    tree.visit(|node, path| {
        match tree.vocabulary.kind(node.t) {
            None => out.push(Violation {
                path: path.to_vec(),
                rule: ViolationRule::TypeOutOfRange,
                message: format!("type index {} outside vocabulary of {}", node.t, tree.vocabulary.len()),
            }),
            Some(kind) => {
                if !node.children.is_empty() && kind == crate::TypeKind::Leaf {
                    out.push(Violation {
                        path: path.to_vec(),
                        rule: ViolationRule::KindMismatch,
                        message: format!(
                            "node of leaf type `{}` has {} children",
                            tree.vocabulary.name(node.t).unwrap_or("?"),
                            node.children.len()
                        ),
                    });
                }
            }
        }
        if !tree.grid.contains(node.quantized_box()) {
            out.push(Violation {
                path: path.to_vec(),
                rule: ViolationRule::GeometryOutOfRange,
                message: format!("box {:?} outside grid", node.quantized_box()),
            });
        }
    });
    out
}

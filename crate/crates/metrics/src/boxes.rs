use layout_core::{LayoutNode, LayoutTree};

/// An axis-aligned box in normalized canvas coordinates (`[0, 1]` on both
/// axes for boxes that lie on the canvas).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box2 {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Box2 {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    /// Area of the intersection with `other` (0 when disjoint).
    pub fn intersection_area(&self, other: &Box2) -> f64 {
        let w = (self.right().min(other.right()) - self.x.max(other.x)).max(0.0);
        let h = (self.bottom().min(other.bottom()) - self.y.max(other.y)).max(0.0);
        w * h
    }

    pub fn from_node(node: &LayoutNode, tree: &LayoutTree) -> Self {
        let [x, y, w, h] = tree.grid.normalize_box(node.quantized_box());
        Self { x, y, w, h }
    }
}

/// A normalized box together with its type index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypedBox {
    pub box_: Box2,
    pub t: u16,
}

/// Normalized boxes of the visible elements: childless nodes of leaf kind.
pub fn leaf_boxes(tree: &LayoutTree) -> Vec<TypedBox> {
    let mut out = Vec::new();
    tree.visit(|node, _| {
        if node.children.is_empty() && tree.vocabulary.is_leaf(node.t) {
            out.push(TypedBox { box_: Box2::from_node(node, tree), t: node.t });
        }
    });
    out
}

/// Normalized boxes of every node.
pub fn node_boxes(tree: &LayoutTree) -> Vec<TypedBox> {
    let mut out = Vec::new();
    tree.visit(|node, _| {
        out.push(TypedBox { box_: Box2::from_node(node, tree), t: node.t });
    });
    out
}

/// All sibling sets: for every node with children, its children's boxes.
pub fn sibling_sets(tree: &LayoutTree) -> Vec<Vec<Box2>> {
    let mut out = Vec::new();
    tree.visit(|node, _| {
        if !node.children.is_empty() {
            out.push(node.children.iter().map(|c| Box2::from_node(c, tree)).collect());
        }
    });
    out
}

/// All parent-child pairs as `(parent, child)` typed boxes.
pub fn parent_child_pairs(tree: &LayoutTree) -> Vec<(TypedBox, TypedBox)> {
    let mut out = Vec::new();
    tree.visit(|node, _| {
        let parent = TypedBox { box_: Box2::from_node(node, tree), t: node.t };
        for c in &node.children {
            out.push((parent, TypedBox { box_: Box2::from_node(c, tree), t: c.t }));
        }
    });
    out
}

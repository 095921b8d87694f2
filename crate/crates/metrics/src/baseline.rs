use crate::{Box2, TypedBox};
use layout_core::{LayoutNode, LayoutTree, QuantGrid, TypeVocabulary};
use std::sync::Arc;

/// Reassemble a layout tree from flat element and internal-box lists, the way
/// flat-generation baselines are given an implicit structure.
///
/// Each box's parent is the internal box that (a) has a strictly larger area
/// and (b) covers it most, measured as `area(overlap) / area(box)`. Ties pick
/// the smaller parent area, then the earlier input position. Boxes covered by
/// no qualifying internal attach to a synthetic full-canvas root. Internals
/// are parented among themselves by the same rule, so nested containers stack
/// correctly.
pub fn baseline_extract_structure(
    elements: &[TypedBox],
    internals: &[TypedBox],
    vocabulary: Arc<TypeVocabulary>,
    grid: Arc<QuantGrid>,
) -> LayoutTree {
    let parent_of_internal: Vec<Option<usize>> = internals
        .iter()
        .enumerate()
        .map(|(i, tb)| best_parent(&tb.box_, internals, Some(i)))
        .collect();
    let parent_of_element: Vec<Option<usize>> =
        elements.iter().map(|tb| best_parent(&tb.box_, internals, None)).collect();

    // children lists in input order: internals first, then elements
    let mut internal_children: Vec<Vec<Child>> = vec![Vec::new(); internals.len()];
    let mut root_children: Vec<Child> = Vec::new();
    for (i, parent) in parent_of_internal.iter().enumerate() {
        let child = Child::Internal(i);
        match parent {
            Some(p) => internal_children[*p].push(child),
            None => root_children.push(child),
        }
    }
    for (e, parent) in parent_of_element.iter().enumerate() {
        let child = Child::Element(e);
        match parent {
            Some(p) => internal_children[*p].push(child),
            None => root_children.push(child),
        }
    }

    fn build(
        child: &Child,
        elements: &[TypedBox],
        internals: &[TypedBox],
        internal_children: &[Vec<Child>],
        grid: &QuantGrid,
    ) -> LayoutNode {
        match child {
            Child::Element(e) => LayoutNode::leaf(quantize(&elements[*e].box_, grid), elements[*e].t),
            Child::Internal(i) => {
                let children = internal_children[*i]
                    .iter()
                    .map(|c| build(c, elements, internals, internal_children, grid))
                    .collect();
                LayoutNode::internal(quantize(&internals[*i].box_, grid), internals[*i].t, children)
            }
        }
    }

    let children: Vec<LayoutNode> = root_children
        .iter()
        .map(|c| build(c, elements, internals, &internal_children, &grid))
        .collect();
    let root_box = quantize(&Box2::new(0.0, 0.0, 1.0, 1.0), &grid);
    let root = LayoutNode::internal(root_box, vocabulary.first_internal(), children);
    LayoutTree::new(root, vocabulary, grid)
}

#[derive(Clone, Copy)]
enum Child {
    Internal(usize),
    Element(usize),
}

/// The covering rule: strictly larger area, maximal overlap ratio, ties by
/// smaller parent area then input order. `skip` excludes a box from being its
/// own parent.
fn best_parent(b: &Box2, internals: &[TypedBox], skip: Option<usize>) -> Option<usize> {
    let area = b.area();
    if area <= 0.0 {
        return None;
    }
    let mut best: Option<(usize, f64, f64)> = None; // (index, ratio, parent_area)
    for (i, cand) in internals.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let pa = cand.box_.area();
        if pa <= area {
            continue;
        }
        let ratio = cand.box_.intersection_area(b) / area;
        if ratio <= 0.0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, br, bpa)) => {
                ratio > br + 1e-12 || ((ratio - br).abs() <= 1e-12 && pa < bpa - 1e-12)
            }
        };
        if better {
            best = Some((i, ratio, pa));
        }
    }
    best.map(|(i, _, _)| i)
}

fn quantize(b: &Box2, grid: &QuantGrid) -> [u16; 4] {
    // to layout units, flooring degenerate sizes up to half a bin so the
    // output always quantizes
    let min_w = 0.5 * grid.canvas_w / f64::from(grid.bins_w);
    let min_h = 0.5 * grid.canvas_h / f64::from(grid.bins_h);
    let x = (b.x * grid.canvas_w).clamp(0.0, grid.canvas_w);
    let y = (b.y * grid.canvas_h).clamp(0.0, grid.canvas_h);
    let w = (b.w * grid.canvas_w).clamp(min_w, grid.canvas_w);
    let h = (b.h * grid.canvas_h).clamp(min_h, grid.canvas_h);
    let w = w.min(grid.canvas_w - x).max(min_w * 0.5);
    let h = h.min(grid.canvas_h - y).max(min_h * 0.5);
    grid.quantize_box([x, y, w, h]).expect("clamped box quantizes")
}

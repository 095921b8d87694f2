//! Deterministic SVG rendering of layout trees: visible elements, per-level
//! panels, or a translucent overlay of the whole hierarchy.

use layout_core::{LayoutNode, LayoutTree};
use std::fmt::Write;

/// How hierarchy levels are shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelView {
    /// Leaf elements only, opaque.
    VisibleOnly,
    /// One panel per tree depth, side by side (one SVG group per level).
    PerLevel,
    /// All levels stacked in one panel with translucent fills.
    Overlay,
}

impl std::str::FromStr for LevelView {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "visible" | "visible-only" => Ok(Self::VisibleOnly),
            "levels" | "per-level" => Ok(Self::PerLevel),
            "overlay" => Ok(Self::Overlay),
            other => Err(format!("unknown render mode `{other}` (visible | levels | overlay)")),
        }
    }
}

/// Rendering parameters. Colors are a pure function of the type name, so the
/// same vocabulary always renders identically.
#[derive(Debug, Clone)]
pub struct RenderSpec {
    pub width: f64,
    pub height: f64,
    pub view: LevelView,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self { width: 320.0, height: 320.0, view: LevelView::VisibleOnly }
    }
}

const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac", "#2f4b7c", "#a05195",
];

/// Stable palette assignment via FNV-1a over the type name.
fn color_of(name: &str) -> &'static str {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    PALETTE[(hash % PALETTE.len() as u64) as usize]
}

fn xml_escape(name: &str) -> String {
    name.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Placed<'a> {
    node: &'a LayoutNode,
    depth: usize,
}

fn flatten<'a>(tree: &'a LayoutTree) -> Vec<Placed<'a>> {
    let mut out = Vec::new();
    fn go<'a>(node: &'a LayoutNode, depth: usize, out: &mut Vec<Placed<'a>>) {
        out.push(Placed { node, depth });
        for c in &node.children {
            go(c, depth + 1, out);
        }
    }
    go(&tree.root, 1, &mut out);
    out
}

fn rect(
    out: &mut String,
    tree: &LayoutTree,
    node: &LayoutNode,
    spec: &RenderSpec,
    dx: f64,
    opacity: f64,
) {
    let [x, y, w, h] = tree.grid.normalize_box(node.quantized_box());
    let name = tree.vocabulary.name(node.t).unwrap_or("?");
    let fill = color_of(name);
    let title = xml_escape(name);
    let stroke = if tree.vocabulary.is_internal(node.t) { " stroke=\"#333333\" stroke-width=\"1\"" } else { "" };
    let _ = write!(
        out,
        "    <rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" fill-opacity=\"{:.2}\"{}><title>{}</title></rect>\n",
        dx + x * spec.width,
        y * spec.height,
        (w * spec.width).max(0.5),
        (h * spec.height).max(0.5),
        fill,
        opacity,
        stroke,
        title,
    );
}

/// Render a tree to an SVG document string. Output is deterministic: the same
/// tree and spec produce byte-identical documents.
pub fn render_svg(tree: &LayoutTree, spec: &RenderSpec) -> String {
    let placed = flatten(tree);
    let depth = placed.iter().map(|p| p.depth).max().unwrap_or(1);
    let panels = match spec.view {
        LevelView::PerLevel => depth,
        _ => 1,
    };
    let gap = 8.0;
    let total_w = spec.width * panels as f64 + gap * (panels.saturating_sub(1)) as f64;

    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n",
        total_w, spec.height, total_w, spec.height
    );
    match spec.view {
        LevelView::VisibleOnly => {
            out.push_str("  <g id=\"visible\">\n");
            for p in placed
                .iter()
                .filter(|p| p.node.children.is_empty() && tree.vocabulary.is_leaf(p.node.t))
            {
                rect(&mut out, tree, p.node, spec, 0.0, 1.0);
            }
            out.push_str("  </g>\n");
        }
        LevelView::PerLevel => {
            for level in 1..=depth {
                let dx = (level - 1) as f64 * (spec.width + gap);
                let _ = write!(out, "  <g id=\"level-{level}\">\n");
                for p in placed.iter().filter(|p| p.depth == level) {
                    rect(&mut out, tree, p.node, spec, dx, 1.0);
                }
                out.push_str("  </g>\n");
            }
        }
        LevelView::Overlay => {
            for level in 1..=depth {
                let _ = write!(out, "  <g id=\"level-{level}\">\n");
                for p in placed.iter().filter(|p| p.depth == level) {
                    rect(&mut out, tree, p.node, spec, 0.0, 0.35);
                }
                out.push_str("  </g>\n");
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use layout_core::{LayoutNode, QuantGrid, TypeVocabulary};
    use std::sync::Arc;

    fn tree(root: LayoutNode) -> LayoutTree {
        LayoutTree::new(
            root,
            Arc::new(TypeVocabulary::synthetic()),
            Arc::new(QuantGrid::default64()),
        )
    }

    #[test]
    fn single_leaf_renders_one_rect() {
        let t = tree(LayoutNode::leaf([4, 4, 20, 10], 5));
        let svg = render_svg(&t, &RenderSpec::default());
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(svg.contains("viewBox"));
    }

    #[test]
    fn per_level_groups_follow_depth() {
        let t = tree(LayoutNode::internal(
            [0, 0, 63, 63],
            1,
            vec![
                LayoutNode::internal([0, 0, 30, 63], 4, vec![LayoutNode::leaf([1, 1, 5, 5], 5)]),
                LayoutNode::internal(
                    [32, 0, 30, 63],
                    0,
                    vec![LayoutNode::leaf([33, 1, 5, 5], 6), LayoutNode::leaf([40, 1, 5, 5], 7)],
                ),
            ],
        ));
        let svg = render_svg(&t, &RenderSpec { view: LevelView::PerLevel, ..Default::default() });
        assert!(svg.contains("id=\"level-1\"") && svg.contains("id=\"level-3\""));
        // 1 root + 2 containers + 3 leaves
        assert_eq!(svg.matches("<rect").count(), 6);
    }

    #[test]
    fn rendering_is_byte_identical() {
        let t = tree(LayoutNode::internal(
            [0, 0, 63, 63],
            0,
            vec![LayoutNode::leaf([1, 1, 10, 10], 5)],
        ));
        let spec = RenderSpec { view: LevelView::Overlay, ..Default::default() };
        assert_eq!(render_svg(&t, &spec), render_svg(&t, &spec));
    }
}

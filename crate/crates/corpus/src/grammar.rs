use layout_core::{LayoutNode, LayoutTree, QuantGrid, TypeVocabulary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Grammar of the synthetic structured-layout corpus.
///
/// Productions place children strictly inside their parent (inclusion is 1 by
/// construction) and keep LinearH/LinearV siblings edge-aligned and disjoint
/// (a gutter of at least one bin separates them). Grid and List children are
/// exactly equal-sized. Geometry is deterministic given the parent box and
/// child count, which keeps the corpus learnable at desk scale.
#[derive(Debug, Clone)]
pub struct SyntheticGrammarSpec {
    pub vocabulary: Arc<TypeVocabulary>,
    pub grid: Arc<QuantGrid>,
    /// Weighted child counts for LinearH/LinearV/List containers.
    pub branching: Vec<(usize, f64)>,
    /// Weighted maximum tree depths.
    pub depth: Vec<(usize, f64)>,
    /// Bins between adjacent siblings (>= 1 keeps dequantized boxes disjoint).
    pub gutter: u16,
    /// Bins between a container's border and its children.
    pub padding: u16,
    /// Probability of replacing a canonical leaf label with a random one.
    pub leaf_jitter: f64,
    /// Hard cap on nodes per tree.
    pub max_nodes: usize,
}

impl SyntheticGrammarSpec {
    pub fn new(vocabulary: Arc<TypeVocabulary>, grid: Arc<QuantGrid>) -> Self {
        Self {
            vocabulary,
            grid,
            branching: vec![(2, 0.5), (3, 0.35), (4, 0.15)],
            depth: vec![(2, 0.30), (3, 0.55), (4, 0.15)],
            gutter: 1,
            padding: 1,
            leaf_jitter: 0.05,
            max_nodes: 30,
        }
    }

    pub fn default_synthetic() -> Self {
        Self::new(Arc::new(TypeVocabulary::synthetic()), Arc::new(QuantGrid::default64()))
    }
}

/// Bin-space box: `(x, y, w, h)` where the node owns the span
/// `[x, x + w] x [y, y + h]` once dequantized (up to the uniform half-bin
/// shift shared by all boxes).
#[derive(Debug, Clone, Copy)]
struct Span {
    x: u16,
    y: u16,
    w: u16,
    h: u16,
}

const MIN_SPAN: u16 = 2;

struct Gen<'a> {
    spec: &'a SyntheticGrammarSpec,
    names: Names,
    budget: usize,
}

#[derive(Debug, Clone, Copy)]
struct Names {
    linear_h: u16,
    linear_v: u16,
    grid: u16,
    list: u16,
    frame: u16,
    text: u16,
    image: u16,
    icon: u16,
    button: u16,
}

impl Names {
    fn resolve(vocab: &TypeVocabulary) -> Self {
        let get = |n: &str| vocab.index_of(n).unwrap_or_else(|| panic!("grammar type `{n}` missing"));
        Self {
            linear_h: get("LinearH"),
            linear_v: get("LinearV"),
            grid: get("Grid"),
            list: get("List"),
            frame: get("Frame"),
            text: get("Text"),
            image: get("Image"),
            icon: get("Icon"),
            button: get("Button"),
        }
    }
}

fn weighted<R: Rng>(rng: &mut R, table: &[(usize, f64)]) -> usize {
    let total: f64 = table.iter().map(|(_, w)| w).sum();
    let mut roll = rng.gen_range(0.0..total);
    for (v, w) in table {
        if roll < *w {
            return *v;
        }
        roll -= w;
    }
    table.last().expect("non-empty table").0
}

impl Gen<'_> {
    fn leaf_type<R: Rng>(&self, rng: &mut R, canonical: u16) -> u16 {
        if self.spec.leaf_jitter > 0.0 && rng.gen_bool(self.spec.leaf_jitter) {
            let leaves: Vec<u16> = (0..self.spec.vocabulary.len() as u16)
                .filter(|&t| self.spec.vocabulary.is_leaf(t))
                .collect();
            leaves[rng.gen_range(0..leaves.len())]
        } else {
            canonical
        }
    }

    /// Largest feasible child count `<= want` for splitting `extent` into
    /// equal spans with gutters and padding.
    fn feasible_children(&self, extent: u16, want: usize) -> usize {
        let p = 2 * self.spec.padding;
        let g = self.spec.gutter;
        let mut k = want;
        while k >= 2 {
            let need = p as usize + (k - 1) * g as usize + k * MIN_SPAN as usize;
            if need <= extent as usize {
                return k;
            }
            k -= 1;
        }
        0
    }

    fn expand<R: Rng>(&mut self, rng: &mut R, arrangement: u16, span: Span, depth_left: usize) -> LayoutNode {
        let n = self.names;
        let children = if arrangement == n.linear_h {
            self.split_linear(rng, span, depth_left, false)
        } else if arrangement == n.linear_v {
            self.split_linear(rng, span, depth_left, true)
        } else if arrangement == n.grid {
            self.split_grid(rng, span)
        } else if arrangement == n.list {
            self.split_list(rng, span)
        } else {
            self.split_frame(rng, span, depth_left)
        };
        LayoutNode::internal([span.x, span.y, span.w, span.h], arrangement, children)
    }

    /// LinearH (vertical = false) or LinearV (vertical = true): equal spans
    /// with the division remainder granted to the first child; children are
    /// edge-aligned on the cross axis and separated by the gutter.
    fn split_linear<R: Rng>(&mut self, rng: &mut R, span: Span, depth_left: usize, vertical: bool) -> Vec<LayoutNode> {
        let n = self.names;
        let p = self.spec.padding;
        let g = self.spec.gutter;
        let main_extent = if vertical { span.h } else { span.w };
        let want = weighted(rng, &self.spec.branching);
        let k = self.feasible_children(main_extent, want).min(self.budget);
        if k < 2 {
            // not enough room or budget: degenerate into a single inset leaf
            return self.split_frame(rng, span, 1);
        }
        let usable = main_extent - 2 * p - (k as u16 - 1) * g;
        let each = usable / k as u16;
        let rem = usable % k as u16;
        let cross_offset = p;
        let cross_extent = if vertical { span.w - 2 * p } else { span.h - 2 * p };
        let mut out = Vec::with_capacity(k);
        let mut cursor = (if vertical { span.y } else { span.x }) + p;
        for i in 0..k {
            let mine = if i == 0 { each + rem } else { each };
            let child_span = if vertical {
                Span { x: span.x + cross_offset, y: cursor, w: cross_extent, h: mine }
            } else {
                Span { x: cursor, y: span.y + cross_offset, w: mine, h: cross_extent }
            };
            cursor += mine + g;
            self.budget -= 1;
            // budget owed to the siblings still waiting in this split
            let reserve = k - 1 - i;
            // LinearV rows may deepen into sub-containers; LinearH cells are
            // always visible elements
            let deepen = vertical
                && depth_left > 2
                && self.budget >= reserve + 2
                && child_span.w >= 2 * p + 2 * MIN_SPAN + g
                && child_span.h >= 2 * p + MIN_SPAN
                && rng.gen_bool(0.65);
            if deepen {
                let arrangement = *pick(rng, &[(n.linear_h, 0.35), (n.list, 0.25), (n.grid, 0.2), (n.frame, 0.2)]);
                self.budget -= reserve;
                let child = self.expand(rng, arrangement, child_span, depth_left - 1);
                self.budget += reserve;
                out.push(child);
            } else {
                let canonical = if vertical {
                    [n.text, n.image][i % 2]
                } else {
                    [n.icon, n.text, n.button][i % 3]
                };
                let t = self.leaf_type(rng, canonical);
                out.push(LayoutNode::leaf([child_span.x, child_span.y, child_span.w, child_span.h], t));
            }
        }
        out
    }

    /// 2x2 grid of exactly equal cells, all Image leaves.
    fn split_grid<R: Rng>(&mut self, rng: &mut R, span: Span) -> Vec<LayoutNode> {
        let n = self.names;
        let p = self.spec.padding;
        let g = self.spec.gutter;
        if self.budget < 4 || self.feasible_children(span.w, 2) < 2 || self.feasible_children(span.h, 2) < 2 {
            return self.split_frame(rng, span, 1);
        }
        let cw = (span.w - 2 * p - g) / 2;
        let ch = (span.h - 2 * p - g) / 2;
        let mut out = Vec::with_capacity(4);
        for row in 0..2u16 {
            for col in 0..2u16 {
                let child = Span {
                    x: span.x + p + col * (cw + g),
                    y: span.y + p + row * (ch + g),
                    w: cw,
                    h: ch,
                };
                self.budget -= 1;
                let t = self.leaf_type(rng, n.image);
                out.push(LayoutNode::leaf([child.x, child.y, child.w, child.h], t));
            }
        }
        out
    }

    /// k exactly equal-height full-width rows, all Text leaves.
    fn split_list<R: Rng>(&mut self, rng: &mut R, span: Span) -> Vec<LayoutNode> {
        let n = self.names;
        let p = self.spec.padding;
        let g = self.spec.gutter;
        let want = weighted(rng, &self.spec.branching);
        let k = self.feasible_children(span.h, want);
        if k < 2 || self.budget < k {
            return self.split_frame(rng, span, 1);
        }
        let each = (span.h - 2 * p - (k as u16 - 1) * g) / k as u16;
        let w = span.w - 2 * p;
        let mut out = Vec::with_capacity(k);
        for i in 0..k as u16 {
            let child = Span { x: span.x + p, y: span.y + p + i * (each + g), w, h: each };
            self.budget -= 1;
            let t = self.leaf_type(rng, n.text);
            out.push(LayoutNode::leaf([child.x, child.y, child.w, child.h], t));
        }
        out
    }

    /// Single inset child; may deepen into a nested container.
    fn split_frame<R: Rng>(&mut self, rng: &mut R, span: Span, depth_left: usize) -> Vec<LayoutNode> {
        let n = self.names;
        let p = self.spec.padding + 1;
        if span.w <= 2 * p + 1 || span.h <= 2 * p + 1 || self.budget == 0 {
            // no room for an inset child: place a minimal one at the corner
            self.budget = self.budget.saturating_sub(1);
            return vec![LayoutNode::leaf(
                [span.x, span.y, span.w.max(1) - 1, span.h.max(1) - 1],
                self.leaf_type(rng, n.button),
            )];
        }
        let child = Span { x: span.x + p, y: span.y + p, w: span.w - 2 * p, h: span.h - 2 * p };
        self.budget -= 1;
        let deepen = depth_left > 2 && self.budget >= 2 && rng.gen_bool(0.5);
        if deepen {
            let arrangement = *pick(rng, &[(n.linear_h, 0.5), (n.list, 0.5)]);
            vec![self.expand(rng, arrangement, child, depth_left - 1)]
        } else {
            vec![LayoutNode::leaf(
                [child.x, child.y, child.w, child.h],
                self.leaf_type(rng, n.button),
            )]
        }
    }
}

fn pick<'a, T, R: Rng>(rng: &mut R, table: &'a [(T, f64)]) -> &'a T {
    let total: f64 = table.iter().map(|(_, w)| w).sum();
    let mut roll = rng.gen_range(0.0..total);
    for (v, w) in table {
        if roll < *w {
            return v;
        }
        roll -= w;
    }
    &table.last().expect("non-empty table").0
}

/// Generate `n` synthetic trees, deterministic per `(spec, seed)`. Each tree
/// is drawn from its own RNG stream, so results are independent of iteration
/// or parallelization order.
pub fn generate_synthetic(spec: &SyntheticGrammarSpec, n: usize, seed: u64) -> Vec<LayoutTree> {
    let names = Names::resolve(&spec.vocabulary);
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut gen = Gen { spec, names, budget: spec.max_nodes };
            let depth = weighted(&mut rng, &spec.depth).max(2);
            let root_arrangement =
                *pick(&mut rng, &[(names.linear_v, 0.5), (names.grid, 0.25), (names.list, 0.25)]);
            let bx = spec.grid.bins_x.min(spec.grid.bins_w) - 1;
            let by = spec.grid.bins_y.min(spec.grid.bins_h) - 1;
            gen.budget -= 1; // the root itself
            let root = gen.expand(&mut rng, root_arrangement, Span { x: 0, y: 0, w: bx, h: by }, depth);
            LayoutTree::new(root, spec.vocabulary.clone(), spec.grid.clone())
        })
        .collect()
}

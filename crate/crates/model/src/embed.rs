use crate::config::LayoutSpace;
use crate::nn::{LinearParams, ParamId, ParamStore, Tape, Var};
use crate::ModelError;
use layout_core::AttrCondition;
use layout_seq::{SeqItem, SeqNode};
use rand::Rng;

/// Anything embeddable as one node token: five optionally-masked attributes
/// plus the two structural flags (absent on conditions and plain attribute
/// tuples).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbedRow {
    pub attrs: [Option<u16>; 5],
    pub leaf: Option<bool>,
    pub last_child: Option<bool>,
}

impl From<&SeqNode> for EmbedRow {
    fn from(n: &SeqNode) -> Self {
        Self {
            attrs: [Some(n.x), Some(n.y), Some(n.w), Some(n.h), Some(n.t)],
            leaf: Some(n.leaf),
            last_child: Some(n.last_child),
        }
    }
}

impl From<&AttrCondition> for EmbedRow {
    fn from(c: &AttrCondition) -> Self {
        Self { attrs: c.as_array(), leaf: None, last_child: None }
    }
}

impl EmbedRow {
    pub fn from_attrs(attrs: [u16; 5]) -> Self {
        Self { attrs: attrs.map(Some), leaf: None, last_child: None }
    }
}

/// Per-attribute embedding tables concatenated and projected to `d_model`;
/// every table reserves one extra row for the mask token, the flag tables one
/// extra row for "not applicable". Special single-token embeddings (`<nl>`,
/// `<eoc>`, `<oc>`, and the encoder pooling token) live here too.
#[derive(Debug, Clone)]
pub struct NodeEmbedder {
    pub d_embed: usize,
    tables: [ParamId; 7],
    sizes: [usize; 7],
    proj: LinearParams,
    pub nl: ParamId,
    pub eoc: ParamId,
    pub oc: ParamId,
    pub cls: ParamId,
}

impl NodeEmbedder {
    pub fn create<R: Rng>(
        store: &mut ParamStore,
        rng: &mut R,
        space: &LayoutSpace,
        d_model: usize,
    ) -> Self {
        let d_embed = (d_model / 2).max(4);
        let bins = space.bins();
        let sizes = [
            bins[0] + 1,
            bins[1] + 1,
            bins[2] + 1,
            bins[3] + 1,
            space.n_types() + 1,
            3,
            3,
        ];
        let names = ["x", "y", "w", "h", "t", "b1", "b2"];
        let mut tables = [ParamId(usize::MAX); 7];
        for (i, (n, s)) in names.iter().zip(sizes.iter()).enumerate() {
            tables[i] = store.add_embedding(rng, format!("embed.{n}.table"), *s, d_embed);
        }
        Self {
            d_embed,
            tables,
            sizes,
            proj: LinearParams::create(store, rng, "embed.proj", 7 * d_embed, d_model),
            nl: store.add_embedding(rng, "embed.nl", 1, d_model),
            eoc: store.add_embedding(rng, "embed.eoc", 1, d_model),
            oc: store.add_embedding(rng, "embed.oc", 1, d_model),
            cls: store.add_embedding(rng, "embed.cls", 1, d_model),
        }
    }

    fn indices(&self, rows: &[EmbedRow]) -> Result<[Vec<usize>; 7], ModelError> {
        let mut out: [Vec<usize>; 7] = Default::default();
        for row in rows {
            for (a, slot) in row.attrs.iter().enumerate() {
                let idx = match slot {
                    None => self.sizes[a] - 1, // the reserved mask slot
                    Some(v) => {
                        let v = *v as usize;
                        if v + 1 >= self.sizes[a] {
                            return Err(ModelError::Embedding(format!(
                                "attribute {a} index {v} exceeds table of {}",
                                self.sizes[a] - 1
                            )));
                        }
                        v
                    }
                };
                out[a].push(idx);
            }
            for (a, flag) in [(5usize, row.leaf), (6usize, row.last_child)] {
                out[a].push(match flag {
                    None => 2,
                    Some(false) => 0,
                    Some(true) => 1,
                });
            }
        }
        Ok(out)
    }

    /// Embed a batch of node-like rows to `(len x d_model)` tokens.
    pub fn embed_rows(&self, tape: &mut Tape, rows: &[EmbedRow]) -> Result<Var, ModelError> {
        let idx = self.indices(rows)?;
        let mut parts = Vec::with_capacity(7);
        for (a, table) in self.tables.iter().enumerate() {
            let t = tape.param(*table);
            parts.push(tape.rows(t, &idx[a]));
        }
        let concat = tape.concat_cols(&parts);
        Ok(self.proj.forward(tape, concat))
    }

    /// Embed a full serialized prefix: nodes through the tables, separators
    /// as the dedicated `<nl>` token.
    pub fn embed_items(&self, tape: &mut Tape, items: &[SeqItem]) -> Result<Var, ModelError> {
        let node_rows: Vec<EmbedRow> = items
            .iter()
            .filter_map(|it| it.as_node().map(EmbedRow::from))
            .collect();
        if node_rows.is_empty() {
            // separators only
            let nl = tape.param(self.nl);
            return Ok(tape.rows(nl, &vec![0; items.len()]));
        }
        let nodes = self.embed_rows(tape, &node_rows)?;
        if node_rows.len() == items.len() {
            return Ok(nodes);
        }
        let nl = tape.param(self.nl);
        let source = tape.concat_rows(&[nodes, nl]);
        let nl_row = node_rows.len();
        let mut mapping = Vec::with_capacity(items.len());
        let mut next_node = 0usize;
        for it in items {
            match it {
                SeqItem::Node(_) => {
                    mapping.push(next_node);
                    next_node += 1;
                }
                SeqItem::LevelSep => mapping.push(nl_row),
            }
        }
        Ok(tape.rows(source, &mapping))
    }

    /// One special token replicated `n` times.
    pub fn special(&self, tape: &mut Tape, which: ParamId, n: usize) -> Var {
        let p = tape.param(which);
        if n == 1 {
            p
        } else {
            tape.rows(p, &vec![0; n])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use layout_core::{QuantGrid, TypeVocabulary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn setup() -> (ParamStore, NodeEmbedder, LayoutSpace) {
        let space = LayoutSpace::new(
            Arc::new(TypeVocabulary::synthetic()),
            Arc::new(QuantGrid::default64()),
        );
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let embedder = NodeEmbedder::create(&mut store, &mut rng, &space, 16);
        (store, embedder, space)
    }

    #[test]
    fn embedding_is_deterministic() {
        let (store, embedder, _) = setup();
        let node = SeqNode { x: 3, y: 4, w: 5, h: 6, t: 2, leaf: true, last_child: false };
        let mut tape = Tape::new(&store);
        let a = embedder.embed_rows(&mut tape, &[EmbedRow::from(&node)]).unwrap();
        let b = embedder.embed_rows(&mut tape, &[EmbedRow::from(&node)]).unwrap();
        assert_eq!(tape.value(a), tape.value(b));
    }

    #[test]
    fn type_changes_the_vector() {
        let (store, embedder, _) = setup();
        let a = SeqNode { x: 3, y: 4, w: 5, h: 6, t: 2, leaf: true, last_child: false };
        let b = SeqNode { t: 3, ..a };
        let mut tape = Tape::new(&store);
        let va = embedder.embed_rows(&mut tape, &[EmbedRow::from(&a)]).unwrap();
        let vb = embedder.embed_rows(&mut tape, &[EmbedRow::from(&b)]).unwrap();
        assert_ne!(tape.value(va), tape.value(vb));
    }

    #[test]
    fn fully_masked_condition_embeds_finite() {
        let (store, embedder, _) = setup();
        let mut tape = Tape::new(&store);
        let c = AttrCondition::fully_masked();
        let v = embedder.embed_rows(&mut tape, &[EmbedRow::from(&c)]).unwrap();
        assert!(tape.value(v).iter().all(|x| x.is_finite()));
    }

    #[test]
    fn out_of_range_attribute_is_rejected() {
        let (store, embedder, _) = setup();
        let mut tape = Tape::new(&store);
        let bad = SeqNode { x: 64, y: 0, w: 0, h: 0, t: 0, leaf: true, last_child: true };
        assert!(embedder.embed_rows(&mut tape, &[EmbedRow::from(&bad)]).is_err());
    }

    #[test]
    fn items_with_separators_embed_in_order() {
        let (store, embedder, _) = setup();
        let n = SeqNode { x: 1, y: 1, w: 1, h: 1, t: 0, leaf: false, last_child: true };
        let items = vec![SeqItem::Node(n), SeqItem::LevelSep, SeqItem::Node(n)];
        let mut tape = Tape::new(&store);
        let v = embedder.embed_items(&mut tape, &items).unwrap();
        let m = tape.value(v);
        assert_eq!(m.nrows(), 3);
        assert_eq!(m.row(0), m.row(2));
        assert_ne!(m.row(0), m.row(1));
    }
}

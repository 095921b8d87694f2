//! Boolean attention masks. `mask[[i, j]]` is true when receiver `i` may read
//! sender `j`. Masks apply at every layer of their stack.

use layout_seq::{validate_prefix, SeqError, SeqItem};
use ndarray::Array2;

/// Structure-encoder mask over `[pool, item_0, ..., item_{S-1}]`: the pooling
/// token reads everything; a node reads itself and its parent; separators
/// read only themselves. Nothing reads the pooling token.
pub fn structure_mask(items: &[SeqItem]) -> Result<Array2<bool>, SeqError> {
    let replay = validate_prefix(items)?;
    replay.finish()?;
    let s = items.len() + 1;
    let mut mask = Array2::from_elem((s, s), false);
    for j in 0..s {
        mask[[0, j]] = true;
    }
    for (pos, item) in items.iter().enumerate() {
        let i = pos + 1;
        mask[[i, i]] = true;
        if item.as_node().is_some() {
            if let Some(parent) = replay.parent_recorded(pos) {
                mask[[i, parent + 1]] = true;
            }
        }
    }
    Ok(mask)
}

/// Satisfaction flags of a generator round: per attribute condition and per
/// organization condition.
#[derive(Debug, Clone, Default)]
pub struct RoundSatisfied {
    pub attr: Vec<bool>,
    pub org: Vec<bool>,
}

impl RoundSatisfied {
    pub fn fresh(n_conds: usize, n_orgs: usize) -> Self {
        Self { attr: vec![false; n_conds], org: vec![false; n_orgs] }
    }
}

/// Token-block description of one decoding round inside a generator pass:
/// the round's context token plus `appended` extra tokens (0 for substep 1
/// only, up to 3 when a full node is decoded with teacher forcing).
#[derive(Debug, Clone)]
pub struct RoundBlock {
    pub satisfied: RoundSatisfied,
    pub appended: usize,
}

/// Generator mask over
/// `[cond_0..cond_{n-1}, oc_0..oc_{m-1}, eoc, z, round blocks...]`.
///
/// Receiver rules:
/// - an attribute condition reads itself and the end marker;
/// - an organization condition reads itself, its member conditions, and the
///   end marker;
/// - the end marker reads every condition token and itself;
/// - the structure code reads only itself;
/// - a round's context token reads the conditions *unsatisfied at that
///   round*, the end marker, the structure code, and itself;
/// - a round's appended tokens additionally read the earlier tokens of their
///   own block.
///
/// Satisfied conditions are silenced at the context/appended receivers (the
/// only rows whose sender set is round-dependent); the condition-side rows
/// are static, which keeps one multi-round pass equal to the per-round
/// passes used at inference.
pub fn generator_mask(
    n_conds: usize,
    orgs: &[Vec<usize>],
    rounds: &[RoundBlock],
) -> Array2<bool> {
    let m = orgs.len();
    let eoc = n_conds + m;
    let z = eoc + 1;
    let base = z + 1;
    let total = base + rounds.iter().map(|r| 1 + r.appended).sum::<usize>();
    let mut mask = Array2::from_elem((total, total), false);

    for i in 0..n_conds {
        mask[[i, i]] = true;
        mask[[i, eoc]] = true;
    }
    for (j, members) in orgs.iter().enumerate() {
        let row = n_conds + j;
        mask[[row, row]] = true;
        mask[[row, eoc]] = true;
        for &c in members {
            mask[[row, c]] = true;
        }
    }
    for c in 0..eoc {
        mask[[eoc, c]] = true;
    }
    mask[[eoc, eoc]] = true;
    mask[[z, z]] = true;

    let mut cursor = base;
    for round in rounds {
        let block_start = cursor;
        let sat = &round.satisfied;
        for offset in 0..=round.appended {
            let row = block_start + offset;
            for c in 0..n_conds {
                if !sat.attr.get(c).copied().unwrap_or(false) {
                    mask[[row, c]] = true;
                }
            }
            for j in 0..m {
                if !sat.org.get(j).copied().unwrap_or(false) {
                    mask[[row, n_conds + j]] = true;
                }
            }
            mask[[row, eoc]] = true;
            mask[[row, z]] = true;
            for earlier in block_start..=row {
                mask[[row, earlier]] = true;
            }
        }
        cursor += 1 + round.appended;
    }
    mask
}

/// Causal self-attention mask for the global-context pass.
pub fn causal_mask(len: usize) -> Array2<bool> {
    Array2::from_shape_fn((len, len), |(i, j)| j <= i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use layout_seq::SeqNode;

    fn node(leaf: bool, last: bool) -> SeqItem {
        SeqItem::Node(SeqNode { x: 0, y: 0, w: 1, h: 1, t: 0, leaf, last_child: last })
    }

    #[test]
    fn structure_mask_wires_parent_and_self() {
        // root -> (a, b)
        let items =
            vec![node(false, true), SeqItem::LevelSep, node(true, false), node(true, true)];
        let mask = structure_mask(&items).unwrap();
        // offsets: 0=pool 1=root 2=NL 3=a 4=b
        assert!(mask[[0, 3]] && mask[[0, 0]]);
        assert!(mask[[1, 1]] && !mask[[1, 3]] && !mask[[1, 0]]);
        assert!(mask[[2, 2]] && !mask[[2, 1]]);
        assert!(mask[[3, 3]] && mask[[3, 1]] && !mask[[3, 4]]);
        assert!(mask[[4, 4]] && mask[[4, 1]] && !mask[[4, 3]]);
    }

    /// Hand-constructed 6x6 matrix for n = 2 conditions, m = 1 organization
    /// over both, nothing satisfied, no appended tokens: exactly the receiver
    /// rules (a)-(e).
    #[test]
    fn generator_mask_matches_hand_matrix() {
        let orgs = vec![vec![0, 1]];
        let rounds =
            vec![RoundBlock { satisfied: RoundSatisfied::fresh(2, 1), appended: 0 }];
        let mask = generator_mask(2, &orgs, &rounds);
        // layout: 0=c0 1=c1 2=oc 3=eoc 4=z 5=e
        let expect = [
            [true, false, false, true, false, false],
            [false, true, false, true, false, false],
            [true, true, true, true, false, false],
            [true, true, true, true, false, false],
            [false, false, false, false, true, false],
            [true, true, true, true, true, true],
        ];
        assert_eq!(mask.nrows(), 6);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(mask[[i, j]], expect[i][j], "mask[{i},{j}]");
            }
        }
    }

    #[test]
    fn satisfied_conditions_are_silenced_at_context_rows() {
        let rounds = vec![RoundBlock {
            satisfied: RoundSatisfied { attr: vec![true, false], org: vec![] },
            appended: 2,
        }];
        let mask = generator_mask(2, &[], &rounds);
        // layout: 0=c0(sat) 1=c1 2=eoc 3=z 4=e 5=p1 6=p2
        for row in 4..=6 {
            assert!(!mask[[row, 0]], "row {row} must not read the satisfied condition");
            assert!(mask[[row, 1]] && mask[[row, 2]] && mask[[row, 3]]);
        }
        // appended tokens read earlier block tokens, not later ones
        assert!(mask[[5, 4]] && mask[[6, 5]] && mask[[6, 4]]);
        assert!(!mask[[4, 5]] && !mask[[5, 6]]);
        // condition rows stay static
        assert!(mask[[2, 0]] && mask[[2, 1]]);
    }

    #[test]
    fn per_round_satisfaction_varies_inside_one_mask() {
        let rounds = vec![
            RoundBlock { satisfied: RoundSatisfied { attr: vec![false], org: vec![] }, appended: 0 },
            RoundBlock { satisfied: RoundSatisfied { attr: vec![true], org: vec![] }, appended: 0 },
        ];
        let mask = generator_mask(1, &[], &rounds);
        // layout: 0=c0 1=eoc 2=z 3=e_r1 4=e_r2
        assert!(mask[[3, 0]], "round 1 still reads the condition");
        assert!(!mask[[4, 0]], "round 2 must not read the satisfied condition");
        assert!(!mask[[3, 4]] && !mask[[4, 3]], "rounds are mutually invisible");
    }
}

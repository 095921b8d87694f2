use layout_core::{ConditionSet, LayoutTree};
use layout_model::masks::RoundSatisfied;
use layout_model::{GenerationState, RoundContext};
use layout_seq::{extract_structure_sequence, serialize, SeqItem, SeqNode, TokenSequence};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TargetError {
    #[error("condition set has no provenance; targets need conditions derived from the tree")]
    MissingProvenance,
    #[error("provenance position {0} is not a node of the serialized tree")]
    BadProvenance(usize),
    #[error(transparent)]
    Seq(#[from] layout_seq::SeqError),
}

/// Supervision for one decoding round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundTarget {
    /// The round emits the level separator (`b3 = 1`).
    LevelSep,
    /// The round emits a node; `selection` is the attribute condition the
    /// node originates from, when any.
    Node { node: SeqNode, selection: Option<usize> },
}

/// Everything teacher forcing needs for one sample.
#[derive(Debug, Clone)]
pub struct SampleTargets {
    pub seq: TokenSequence,
    pub structure_seq: TokenSequence,
    pub cond: ConditionSet,
    pub rounds: Vec<RoundTarget>,
    /// Context-encoder inputs per round.
    pub contexts: Vec<RoundContext>,
    /// Conditions satisfied before each round starts.
    pub satisfied_before: Vec<RoundSatisfied>,
}

impl SampleTargets {
    pub fn node_rounds(&self) -> impl Iterator<Item = (usize, &SeqNode, Option<usize>)> {
        self.rounds.iter().enumerate().filter_map(|(r, t)| match t {
            RoundTarget::Node { node, selection } => Some((r, node, *selection)),
            RoundTarget::LevelSep => None,
        })
    }

    pub fn separator_count(&self) -> usize {
        self.rounds.iter().filter(|r| matches!(r, RoundTarget::LevelSep)).count()
    }
}

/// Turn a ground-truth tree plus its derived conditions into per-round
/// supervision: separator/selection flags per round, attribute and flag
/// targets per node, the per-round satisfaction state, and the structure
/// sequence for the encoder.
pub fn build_targets(tree: &LayoutTree, cond: &ConditionSet) -> Result<SampleTargets, TargetError> {
    let seq = serialize(tree)?;
    let structure_seq = extract_structure_sequence(&seq)?;

    if cond.provenance.len() != cond.attributes.len() {
        return Err(TargetError::MissingProvenance);
    }
    let mut by_position: HashMap<usize, usize> = HashMap::new();
    for (c, prov) in cond.provenance.iter().enumerate() {
        let pos = prov.ok_or(TargetError::MissingProvenance)?;
        match seq.items.get(pos) {
            Some(SeqItem::Node(_)) => by_position.insert(pos, c),
            _ => return Err(TargetError::BadProvenance(pos)),
        };
    }

    let mut state = GenerationState::new(cond.attributes.len(), cond.organizations.clone());
    let mut rounds = Vec::with_capacity(seq.len());
    let mut contexts = Vec::with_capacity(seq.len());
    let mut satisfied_before = Vec::with_capacity(seq.len());
    for (pos, item) in seq.items.iter().enumerate() {
        contexts.push(state.round_context());
        satisfied_before.push(state.satisfied());
        match item {
            SeqItem::LevelSep => rounds.push(RoundTarget::LevelSep),
            SeqItem::Node(node) => {
                rounds.push(RoundTarget::Node { node: *node, selection: by_position.get(&pos).copied() });
            }
        }
        let position = state.push(*item)?;
        debug_assert_eq!(position, pos);
        if let Some(&c) = by_position.get(&pos) {
            state.mark_satisfied(c, pos);
        }
    }
    Ok(SampleTargets { seq, structure_seq, cond: cond.clone(), rounds, contexts, satisfied_before })
}

#[cfg(test)]
mod tests {
    use super::*;
    use layout_core::TaskKind;
    use layout_corpus::{generate_synthetic, make_condition_set, SyntheticGrammarSpec};

    fn sample(seed: u64, task: TaskKind) -> (LayoutTree, ConditionSet) {
        let tree = generate_synthetic(&SyntheticGrammarSpec::default_synthetic(), 1, seed)
            .pop()
            .unwrap();
        let cond = make_condition_set(&tree, task, seed);
        (tree, cond)
    }

    #[test]
    fn separator_targets_count_matches_levels() {
        let (tree, cond) = sample(5, TaskKind::GenT);
        let targets = build_targets(&tree, &cond).unwrap();
        let n_seps = targets.seq.items.iter().filter(|i| i.as_node().is_none()).count();
        assert_eq!(targets.separator_count(), n_seps);
        assert_eq!(n_seps, tree.depth() - 1);
    }

    #[test]
    fn ugen_has_no_selection_targets() {
        let (tree, cond) = sample(7, TaskKind::UGen);
        let targets = build_targets(&tree, &cond).unwrap();
        assert!(targets.node_rounds().all(|(_, _, sel)| sel.is_none()));
    }

    #[test]
    fn gent_supervises_exactly_the_leaves() {
        let (tree, cond) = sample(9, TaskKind::GenT);
        let targets = build_targets(&tree, &cond).unwrap();
        let with_sel = targets.node_rounds().filter(|(_, _, s)| s.is_some()).count();
        assert_eq!(with_sel, cond.attributes.len());
        // selected rounds are leaf nodes of leaf kind
        for (_, node, sel) in targets.node_rounds() {
            if sel.is_some() {
                assert!(node.leaf);
                assert!(tree.vocabulary.is_leaf(node.t));
            }
        }
    }

    #[test]
    fn satisfaction_grows_monotonically_across_rounds() {
        let (tree, cond) = sample(11, TaskKind::GenTS);
        let targets = build_targets(&tree, &cond).unwrap();
        let mut prev = 0;
        for sat in &targets.satisfied_before {
            let count = sat.attr.iter().filter(|&&b| b).count();
            assert!(count >= prev);
            prev = count;
        }
        assert_eq!(prev, cond.attributes.len().saturating_sub(1));
    }

    #[test]
    fn externally_authored_conditions_are_rejected() {
        let (tree, mut cond) = sample(13, TaskKind::GenT);
        if cond.provenance.is_empty() {
            return;
        }
        cond.provenance[0] = None;
        assert!(matches!(build_targets(&tree, &cond), Err(TargetError::MissingProvenance)));
    }

    #[test]
    fn teacher_forced_flags_match_serialization() {
        let (tree, cond) = sample(17, TaskKind::StructExtr);
        let targets = build_targets(&tree, &cond).unwrap();
        for (r, node, _) in targets.node_rounds() {
            match &targets.seq.items[r] {
                SeqItem::Node(n) => assert_eq!(n, node),
                _ => panic!("round {r} mismatch"),
            }
        }
    }
}

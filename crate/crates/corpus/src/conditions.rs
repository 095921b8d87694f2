use layout_core::{AttrCondition, ConditionSet, LayoutTree, TaskKind};
use layout_seq::serialize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Derive the condition set a task poses for a ground-truth tree.
///
/// Conditions are created for visible elements only (childless leaf-kind
/// nodes), in serialization order, and each records the serialized position
/// it came from as provenance:
///
/// - GenT: type kept, geometry masked;
/// - GenTS: type, width, height kept;
/// - UGen: no conditions;
/// - Completion: a seeded random prefix of the elements, fully specified;
/// - StructExtr / StructTran: every element fully specified;
/// - GenO: GenT plus organization groups drawn from true sibling sets.
pub fn make_condition_set(tree: &LayoutTree, task: TaskKind, seed: u64) -> ConditionSet {
    if task == TaskKind::UGen {
        return ConditionSet::empty();
    }
    let seq = serialize(tree).expect("condition recipes need a valid tree");
    // visible elements in serialization order
    let mut leaves: Vec<(usize, [u16; 5])> = Vec::new();
    let mut parent_of: Vec<(usize, Option<usize>)> = Vec::new();
    for (pos, node) in seq.nodes() {
        if node.leaf && tree.vocabulary.is_leaf(node.t) {
            leaves.push((pos, node.attrs()));
            parent_of.push((pos, layout_seq::parent_index_of(&seq.items, pos).unwrap()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0_d1_71_05);

    let mask = |attrs: [u16; 5], keep: [bool; 5]| AttrCondition {
        x: keep[0].then_some(attrs[0]),
        y: keep[1].then_some(attrs[1]),
        w: keep[2].then_some(attrs[2]),
        h: keep[3].then_some(attrs[3]),
        t: keep[4].then_some(attrs[4]),
    };

    let keep_pattern = match task {
        TaskKind::GenT | TaskKind::GenO => [false, false, false, false, true],
        TaskKind::GenTS => [false, false, true, true, true],
        TaskKind::Completion | TaskKind::StructExtr | TaskKind::StructTran => [true; 5],
        TaskKind::UGen => unreachable!(),
    };

    let selected: Vec<usize> = match task {
        TaskKind::Completion => {
            if leaves.is_empty() {
                Vec::new()
            } else {
                let take = rng.gen_range(1..=leaves.len());
                (0..take).collect()
            }
        }
        _ => (0..leaves.len()).collect(),
    };

    let mut cs = ConditionSet::empty();
    for &i in &selected {
        let (pos, attrs) = leaves[i];
        cs.attributes.push(mask(attrs, keep_pattern));
        cs.provenance.push(Some(pos));
    }

    if task == TaskKind::GenO {
        // organization groups from true sibling sets with >= 2 conditioned
        // members; each kept with probability 1/2, at least one when possible
        let mut by_parent: Vec<(Option<usize>, Vec<usize>)> = Vec::new();
        for (ci, &i) in selected.iter().enumerate() {
            let parent = parent_of[i].1;
            match by_parent.iter_mut().find(|(p, _)| *p == parent) {
                Some((_, members)) => members.push(ci),
                None => by_parent.push((parent, vec![ci])),
            }
        }
        let candidates: Vec<Vec<usize>> =
            by_parent.into_iter().filter(|(_, m)| m.len() >= 2).map(|(_, m)| m).collect();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for g in &candidates {
            if rng.gen_bool(0.5) {
                groups.push(g.clone());
            }
        }
        if groups.is_empty() {
            if let Some(first) = candidates.into_iter().next() {
                groups.push(first);
            }
        }
        cs.organizations = groups;
    }

    debug_assert!(cs.check().is_ok());
    cs
}

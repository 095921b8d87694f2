use crate::{validate_prefix, Replay, SeqError, SeqItem, SeqNode, TokenSequence};
use layout_core::{validate_tree, LayoutNode, LayoutTree, QuantGrid, TypeVocabulary};
use std::collections::HashMap;
use std::sync::Arc;

/// Serialize a layout tree level by level.
///
/// Within each level nodes are grouped by parent, in the parents' order; the
/// `leaf` flag marks nodes that contributed no children, `last_child` marks
/// each group's final node (and the root); adjacent levels are separated by a
/// level-separator token.
pub fn serialize(tree: &LayoutTree) -> Result<TokenSequence, SeqError> {
    let violations = validate_tree(tree);
    if !violations.is_empty() {
        return Err(SeqError::InvalidTree(violations));
    }
    let mut items = Vec::new();
    let mut current: Vec<(&LayoutNode, bool)> = vec![(&tree.root, true)];
    let mut first_level = true;
    while !current.is_empty() {
        if !first_level {
            items.push(SeqItem::LevelSep);
        }
        first_level = false;
        let mut next_level: Vec<(&LayoutNode, bool)> = Vec::new();
        for (node, last) in &current {
            items.push(SeqItem::Node(SeqNode {
                x: node.x,
                y: node.y,
                w: node.w,
                h: node.h,
                t: node.t,
                leaf: node.children.is_empty(),
                last_child: *last,
            }));
            for (i, c) in node.children.iter().enumerate() {
                next_level.push((c, i + 1 == node.children.len()));
            }
        }
        current = next_level;
    }
    Ok(TokenSequence::new(items))
}

/// Recover the unique tree encoded by a sequence.
///
/// Consecutive nodes of a level are assigned to the front parent of the
/// previous level's internal-node queue; a `last_child` node closes that
/// parent's group and advances the queue.
pub fn deserialize(
    seq: &TokenSequence,
    vocabulary: Arc<TypeVocabulary>,
    grid: Arc<QuantGrid>,
) -> Result<LayoutTree, SeqError> {
    let mut replay = Replay::new();
    // parent position -> ordered child positions
    let mut children_of: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut nodes: HashMap<usize, SeqNode> = HashMap::new();
    let mut root_pos = None;
    for (pos, item) in seq.items.iter().enumerate() {
        let parent = replay.push(item)?;
        if let SeqItem::Node(n) = item {
            nodes.insert(pos, *n);
            match parent {
                Some(p) => children_of.entry(p).or_default().push(pos),
                None => root_pos = Some(pos),
            }
        }
    }
    replay.finish()?;
    let root_pos = root_pos.expect("finish() guarantees a root");

    fn build(
        pos: usize,
        nodes: &HashMap<usize, SeqNode>,
        children_of: &HashMap<usize, Vec<usize>>,
    ) -> LayoutNode {
        let n = nodes[&pos];
        let children = children_of
            .get(&pos)
            .map(|cs| cs.iter().map(|&c| build(c, nodes, children_of)).collect())
            .unwrap_or_default();
        LayoutNode { x: n.x, y: n.y, w: n.w, h: n.h, t: n.t, children }
    }

    let root = build(root_pos, &nodes, &children_of);
    Ok(LayoutTree::new(root, vocabulary, grid))
}

/// Map each node position of a valid sequence to its path of child indices in
/// the recovered tree (the root has the empty path).
pub fn position_paths(seq: &TokenSequence) -> Result<HashMap<usize, Vec<usize>>, SeqError> {
    let mut replay = Replay::new();
    let mut paths: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut child_counts: HashMap<usize, usize> = HashMap::new();
    for (pos, item) in seq.items.iter().enumerate() {
        let parent = replay.push(item)?;
        if item.as_node().is_none() {
            continue;
        }
        match parent {
            None => {
                paths.insert(pos, Vec::new());
            }
            Some(p) => {
                let idx = child_counts.entry(p).or_insert(0);
                let mut path = paths[&p].clone();
                path.push(*idx);
                *idx += 1;
                paths.insert(pos, path);
            }
        }
    }
    replay.finish()?;
    Ok(paths)
}

/// Drop the leaf nodes of a sequence and renormalize it into the structure
/// sequence fed to the structure encoder.
///
/// Rules: every `leaf`-flagged node except the root is removed; surviving
/// nodes keep their level; a survivor whose children were all removed becomes
/// `leaf` itself; within each surviving parent group the final survivor takes
/// the `last_child` flag; levels left empty collapse (their separators are
/// dropped).
pub fn extract_structure_sequence(seq: &TokenSequence) -> Result<TokenSequence, SeqError> {
    let replay = validate_prefix(&seq.items)?;
    replay.finish()?;

    let root_pos = seq
        .items
        .iter()
        .position(|it| it.as_node().is_some())
        .expect("validated sequence has a root");

    // keep internal (non-leaf) nodes and the root
    let kept: Vec<usize> = seq
        .items
        .iter()
        .enumerate()
        .filter_map(|(pos, item)| match item {
            SeqItem::Node(n) if !n.leaf || pos == root_pos => Some(pos),
            _ => None,
        })
        .collect();
    let kept_set: std::collections::HashSet<usize> = kept.iter().copied().collect();

    // retained-children count per kept parent
    let mut kept_children: HashMap<usize, usize> = HashMap::new();
    for &pos in &kept {
        if let Some(parent) = replay.parent_recorded(pos) {
            *kept_children.entry(parent).or_insert(0) += 1;
        }
    }

    // walk levels, regroup survivors by parent, recompute flags
    let mut out = Vec::new();
    let mut level_start = 0;
    let mut pending_sep = false;
    let items = &seq.items;
    while level_start < items.len() {
        let level_end = items[level_start..]
            .iter()
            .position(|it| matches!(it, SeqItem::LevelSep))
            .map(|i| level_start + i)
            .unwrap_or(items.len());
        let survivors: Vec<usize> =
            (level_start..level_end).filter(|p| kept_set.contains(p)).collect();
        if !survivors.is_empty() {
            if pending_sep {
                out.push(SeqItem::LevelSep);
            }
            for (i, &pos) in survivors.iter().enumerate() {
                let n = match &items[pos] {
                    SeqItem::Node(n) => *n,
                    SeqItem::LevelSep => unreachable!(),
                };
                let parent = replay.parent_recorded(pos);
                let is_last = match parent {
                    None => true, // root
                    Some(p) => {
                        let next_same_parent = survivors[i + 1..]
                            .iter()
                            .any(|&q| replay.parent_recorded(q) == Some(p));
                        !next_same_parent
                    }
                };
                out.push(SeqItem::Node(SeqNode {
                    leaf: kept_children.get(&pos).copied().unwrap_or(0) == 0,
                    last_child: is_last,
                    ..n
                }));
            }
            pending_sep = true;
        }
        level_start = level_end + 1;
    }
    Ok(TokenSequence::new(out))
}

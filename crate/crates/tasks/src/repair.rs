use layout_seq::{validate_sequence, SeqItem, TokenSequence};
use serde::Serialize;

/// One repair action with a diagnostic position: the input position for
/// drops and flag fixes, the output position for demotions (which mutate an
/// already-emitted node when its level turns out childless).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RepairEntry {
    /// A node arrived with no open parent group and was removed.
    DroppedOrphan { position: usize },
    /// A second root-level node was removed.
    DroppedExtraRoot { position: usize },
    /// The final node of a group had its last-child flag forced on when its
    /// level ended.
    ForcedLastChild { position: usize },
    /// An internal node never received children and was downgraded to a leaf.
    DemotedChildless { position: usize },
    /// A separator with no following level was removed.
    DroppedTrailingSeparator { position: usize },
}

/// Minimal repair of a (possibly malformed) generated sequence.
///
/// Guarantees that the output validates: orphan nodes are dropped, each
/// non-empty group is closed at its level boundary, internal nodes that never
/// received children become leaves, trailing separators go away. Returns the
/// repaired sequence, the log, and a map from input positions to output
/// positions (`None` for dropped items).
pub fn repair_sequence(
    seq: &TokenSequence,
) -> Option<(TokenSequence, Vec<RepairEntry>, Vec<Option<usize>>)> {
    let items = &seq.items;
    let mut log = Vec::new();
    let mut out: Vec<SeqItem> = Vec::new();
    let mut mapping: Vec<Option<usize>> = vec![None; items.len()];

    // parents of the current level: (output position, received a child yet)
    let mut parents: Vec<usize> = Vec::new();
    let mut cursor = 0usize;
    let mut level = 1usize;
    let mut root_seen = false;
    let mut group_open_node: Option<usize> = None; // last output node of the open group
    let mut next_parents: Vec<usize> = Vec::new();

    let close_level = |out: &mut Vec<SeqItem>,
                           log: &mut Vec<RepairEntry>,
                           parents: &[usize],
                           cursor: &mut usize,
                           group_open_node: &mut Option<usize>,
                           input_pos: usize| {
        // close a half-filled group by forcing the flag on its last node
        if let Some(last) = group_open_node.take() {
            if let SeqItem::Node(n) = &mut out[last] {
                if !n.last_child {
                    n.last_child = true;
                    log.push(RepairEntry::ForcedLastChild { position: input_pos });
                }
            }
            *cursor += 1;
        }
        // parents that never received any child become leaves
        while *cursor < parents.len() {
            let p = parents[*cursor];
            if let SeqItem::Node(n) = &mut out[p] {
                n.leaf = true;
                log.push(RepairEntry::DemotedChildless { position: p });
            }
            *cursor += 1;
        }
    };

    for (pos, item) in items.iter().enumerate() {
        match item {
            SeqItem::Node(node) => {
                if level == 1 {
                    if root_seen {
                        log.push(RepairEntry::DroppedExtraRoot { position: pos });
                        continue;
                    }
                    root_seen = true;
                    let mut n = *node;
                    if !n.last_child {
                        n.last_child = true;
                        log.push(RepairEntry::ForcedLastChild { position: pos });
                    }
                    mapping[pos] = Some(out.len());
                    if !n.leaf {
                        next_parents.push(out.len());
                    }
                    out.push(SeqItem::Node(n));
                } else {
                    if cursor >= parents.len() {
                        log.push(RepairEntry::DroppedOrphan { position: pos });
                        continue;
                    }
                    mapping[pos] = Some(out.len());
                    if !node.leaf {
                        next_parents.push(out.len());
                    }
                    if node.last_child {
                        cursor += 1;
                        group_open_node = None;
                    } else {
                        group_open_node = Some(out.len());
                    }
                    out.push(SeqItem::Node(*node));
                }
            }
            SeqItem::LevelSep => {
                if !root_seen {
                    // leading separator: nothing to separate yet
                    log.push(RepairEntry::DroppedTrailingSeparator { position: pos });
                    continue;
                }
                close_level(&mut out, &mut log, &parents, &mut cursor, &mut group_open_node, pos);
                mapping[pos] = Some(out.len());
                out.push(SeqItem::LevelSep);
                parents = std::mem::take(&mut next_parents);
                cursor = 0;
                level += 1;
            }
        }
    }
    if !root_seen {
        return None;
    }
    close_level(&mut out, &mut log, &parents, &mut cursor, &mut group_open_node, items.len());
    // demote any internal nodes of the final level: no level follows
    for p in next_parents {
        if let SeqItem::Node(n) = &mut out[p] {
            if !n.leaf {
                n.leaf = true;
                log.push(RepairEntry::DemotedChildless { position: p });
            }
        }
    }
    // trailing separators carry no level
    while matches!(out.last(), Some(SeqItem::LevelSep)) {
        let gone = out.len() - 1;
        out.pop();
        for m in mapping.iter_mut() {
            if *m == Some(gone) {
                *m = None;
                log.push(RepairEntry::DroppedTrailingSeparator { position: gone });
            }
        }
    }

    let repaired = TokenSequence::new(out);
    debug_assert!(validate_sequence(&repaired.items).is_ok(), "repair must produce a valid sequence");
    Some((repaired, log, mapping))
}

use crate::{MalformedReason, SeqError, SeqItem};

/// Incremental replay of the queue rule that underlies sequence recovery.
///
/// Feed items one at a time; the replay tracks which parent from the previous
/// level the next node attaches to. It is usable on prefixes, so generation
/// can interleave replay with decoding.
#[derive(Debug, Clone)]
pub struct Replay {
    /// 1-based level of the item fed next.
    level: usize,
    /// Positions of the previous level's internal nodes, i.e. the parent
    /// queue of the current level.
    parents: Vec<usize>,
    /// Front of the parent queue (parents before it are closed).
    cursor: usize,
    /// Positions of internal nodes seen in the current level.
    next_parents: Vec<usize>,
    /// Nodes seen at level 1.
    root_count: usize,
    /// Items consumed so far.
    consumed: usize,
    /// Set once a separator advances past a level that produced no internal
    /// nodes: the sequence is complete and nothing may follow.
    terminated: bool,
    /// Per-position parent (None for the root and for separators).
    parent_of: Vec<Option<usize>>,
}

impl Replay {
    pub fn new() -> Self {
        Self {
            level: 1,
            parents: Vec::new(),
            cursor: 0,
            next_parents: Vec::new(),
            root_count: 0,
            consumed: 0,
            terminated: false,
            parent_of: Vec::new(),
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    /// Position of the parent the next node would attach to, or `None` at the
    /// root level or once the sequence has terminated.
    pub fn pending_parent(&self) -> Option<usize> {
        if self.level == 1 {
            None
        } else {
            self.parents.get(self.cursor).copied()
        }
    }

    /// True when every parent group of the current level has been closed.
    pub fn level_closed(&self) -> bool {
        if self.level == 1 {
            self.root_count == 1
        } else {
            self.cursor >= self.parents.len()
        }
    }

    /// True when the current level has produced no internal nodes so far.
    pub fn no_internal_this_level(&self) -> bool {
        self.next_parents.is_empty()
    }

    /// True once a terminating separator has been consumed.
    pub fn terminated(&self) -> bool {
        self.terminated
    }

    /// Parent position recorded for item `position` (fed earlier).
    pub fn parent_recorded(&self, position: usize) -> Option<usize> {
        self.parent_of.get(position).copied().flatten()
    }

    /// Feed one item. For nodes, returns the parent position it attaches to.
    pub fn push(&mut self, item: &SeqItem) -> Result<Option<usize>, SeqError> {
        let position = self.consumed;
        if self.terminated {
            return Err(SeqError::Malformed {
                position,
                reason: MalformedReason::ItemAfterTerminator,
            });
        }
        let parent = match item {
            SeqItem::Node(node) => {
                if self.level == 1 {
                    if self.root_count >= 1 {
                        return Err(SeqError::Malformed {
                            position,
                            reason: MalformedReason::MultipleRoots,
                        });
                    }
                    if !node.last_child {
                        return Err(SeqError::Malformed {
                            position,
                            reason: MalformedReason::RootWithoutLastFlag,
                        });
                    }
                    self.root_count += 1;
                    if !node.leaf {
                        self.next_parents.push(position);
                    }
                    None
                } else {
                    if self.cursor >= self.parents.len() {
                        return Err(SeqError::Malformed {
                            position,
                            reason: MalformedReason::NodeAfterParentsExhausted,
                        });
                    }
                    let parent = self.parents[self.cursor];
                    if !node.leaf {
                        self.next_parents.push(position);
                    }
                    if node.last_child {
                        self.cursor += 1;
                    }
                    Some(parent)
                }
            }
            SeqItem::LevelSep => {
                if position == 0 {
                    return Err(SeqError::Malformed {
                        position,
                        reason: MalformedReason::LeadingSeparator,
                    });
                }
                if !self.level_closed() {
                    return Err(SeqError::Malformed {
                        position,
                        reason: MalformedReason::SeparatorBeforeGroupsClosed,
                    });
                }
                self.parents = std::mem::take(&mut self.next_parents);
                self.cursor = 0;
                self.level += 1;
                if self.parents.is_empty() {
                    self.terminated = true;
                }
                None
            }
        };
        self.consumed += 1;
        self.parent_of.push(parent);
        Ok(parent)
    }

    /// Final checks once the whole sequence has been fed.
    pub fn finish(&self) -> Result<(), SeqError> {
        if self.consumed == 0 {
            return Err(SeqError::Malformed { position: 0, reason: MalformedReason::EmptySequence });
        }
        if !self.level_closed() {
            return Err(SeqError::Malformed {
                position: self.consumed,
                reason: MalformedReason::UnclosedParentGroup,
            });
        }
        if !self.next_parents.is_empty() {
            return Err(SeqError::Malformed {
                position: self.consumed,
                reason: MalformedReason::DanglingInternalNodes,
            });
        }
        Ok(())
    }
}

impl Default for Replay {
    fn default() -> Self {
        Self::new()
    }
}

/// Validate a full sequence against the serialization invariants.
///
/// A single trailing separator after the final level is accepted as the
/// terminator emitted by autoregressive generation; canonical serializations
/// do not carry it.
pub fn validate_sequence(items: &[SeqItem]) -> Result<(), SeqError> {
    let mut replay = Replay::new();
    for item in items {
        replay.push(item)?;
    }
    replay.finish()
}

/// Validate a prefix: replays the queue rule without end-of-sequence checks.
pub fn validate_prefix(items: &[SeqItem]) -> Result<Replay, SeqError> {
    let mut replay = Replay::new();
    for item in items {
        replay.push(item)?;
    }
    Ok(replay)
}

/// Serialized position of node `k`'s parent, replaying the queue rule on the
/// prefix `items[..=k]`. Returns `None` for the root and for separators.
pub fn parent_index_of(items: &[SeqItem], k: usize) -> Result<Option<usize>, SeqError> {
    if k >= items.len() {
        return Err(SeqError::Malformed {
            position: k,
            reason: MalformedReason::EmptySequence,
        });
    }
    let mut replay = Replay::new();
    let mut last = None;
    for item in &items[..=k] {
        last = replay.push(item)?;
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SeqNode;

    fn node(leaf: bool, last: bool) -> SeqItem {
        SeqItem::Node(SeqNode { x: 0, y: 0, w: 1, h: 1, t: 0, leaf, last_child: last })
    }

    #[test]
    fn single_leaf_root_is_valid() {
        assert!(validate_sequence(&[node(true, true)]).is_ok());
    }

    #[test]
    fn multiple_roots_rejected() {
        let err = validate_sequence(&[node(true, true), node(true, true)]).unwrap_err();
        match err {
            SeqError::Malformed { position, reason } => {
                assert_eq!(position, 1);
                assert_eq!(reason, MalformedReason::MultipleRoots);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_internal_rejected() {
        let err = validate_sequence(&[node(false, true)]).unwrap_err();
        match err {
            SeqError::Malformed { reason, .. } => {
                assert_eq!(reason, MalformedReason::DanglingInternalNodes)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trailing_terminator_accepted_once() {
        let seq = [node(false, true), SeqItem::LevelSep, node(true, true), SeqItem::LevelSep];
        assert!(validate_sequence(&seq).is_ok());
        let twice = [
            node(false, true),
            SeqItem::LevelSep,
            node(true, true),
            SeqItem::LevelSep,
            SeqItem::LevelSep,
        ];
        assert!(validate_sequence(&twice).is_err());
    }

    #[test]
    fn separator_before_group_closed_rejected() {
        let seq = [node(false, true), SeqItem::LevelSep, node(true, false), SeqItem::LevelSep];
        let err = validate_sequence(&seq).unwrap_err();
        match err {
            SeqError::Malformed { position, reason } => {
                assert_eq!(position, 3);
                assert_eq!(reason, MalformedReason::SeparatorBeforeGroupsClosed);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pending_parent_tracks_the_queue() {
        // root -> (A internal, B internal), A -> a, B -> b
        let seq = [
            node(false, true),
            SeqItem::LevelSep,
            node(false, false),
            node(false, true),
            SeqItem::LevelSep,
            node(true, true),
            node(true, true),
        ];
        let mut replay = Replay::new();
        for item in &seq[..6] {
            replay.push(item).unwrap();
        }
        // first grandchild went to A (pos 2) and closed it; next goes to B
        assert_eq!(replay.pending_parent(), Some(3));
        assert_eq!(parent_index_of(&seq, 5).unwrap(), Some(2));
        assert_eq!(parent_index_of(&seq, 6).unwrap(), Some(3));
        assert_eq!(parent_index_of(&seq, 0).unwrap(), None);
    }
}

use crate::context::RoundContext;
use crate::masks::RoundSatisfied;
use layout_seq::{Replay, SeqError, SeqItem};
use std::collections::HashMap;

/// Bookkeeping of one autoregressive generation session: the emitted prefix,
/// per-condition satisfaction, and the structural queue state.
///
/// Satisfaction flags are monotone; the emitted prefix always replays as a
/// valid sequence prefix.
#[derive(Debug, Clone)]
pub struct GenerationState {
    pub emitted: Vec<SeqItem>,
    replay: Replay,
    satisfied_attr: Vec<bool>,
    satisfied_org: Vec<bool>,
    /// Per attribute condition: position of the node that satisfied it.
    matched_node: Vec<Option<usize>>,
    /// Per organization group: the parent position shared by its matched
    /// members (`None` until the first member matches).
    org_parent: Vec<Option<Option<usize>>>,
    orgs: Vec<Vec<usize>>,
    /// Most recent child position per parent position.
    last_child: HashMap<Option<usize>, usize>,
    pub steps: usize,
}

impl GenerationState {
    pub fn new(n_conds: usize, orgs: Vec<Vec<usize>>) -> Self {
        Self {
            emitted: Vec::new(),
            replay: Replay::new(),
            satisfied_attr: vec![false; n_conds],
            satisfied_org: vec![false; orgs.len()],
            matched_node: vec![None; n_conds],
            org_parent: vec![None; orgs.len()],
            orgs,
            last_child: HashMap::new(),
            steps: 0,
        }
    }

    pub fn level(&self) -> usize {
        self.replay.level()
    }

    pub fn pending_parent(&self) -> Option<usize> {
        self.replay.pending_parent()
    }

    pub fn level_closed(&self) -> bool {
        self.replay.level_closed()
    }

    pub fn no_internal_this_level(&self) -> bool {
        self.replay.no_internal_this_level()
    }

    pub fn terminated(&self) -> bool {
        self.replay.terminated()
    }

    pub fn parent_of(&self, position: usize) -> Option<usize> {
        self.replay.parent_recorded(position)
    }

    pub fn satisfied(&self) -> RoundSatisfied {
        RoundSatisfied { attr: self.satisfied_attr.clone(), org: self.satisfied_org.clone() }
    }

    pub fn satisfied_attr(&self) -> &[bool] {
        &self.satisfied_attr
    }

    pub fn matched_node(&self, cond: usize) -> Option<usize> {
        self.matched_node[cond]
    }

    /// Context-encoder inputs for the next round.
    pub fn round_context(&self) -> RoundContext {
        let parent = self.pending_parent();
        let sibling = if self.level() == 1 || parent.is_some() {
            self.last_child.get(&parent).copied()
        } else {
            None
        };
        RoundContext { prefix_len: self.emitted.len(), parent_item: parent, sibling_item: sibling }
    }

    /// Append the next item; the position it received is returned.
    pub fn push(&mut self, item: SeqItem) -> Result<usize, SeqError> {
        let position = self.emitted.len();
        let parent = self.replay.push(&item)?;
        if item.as_node().is_some() {
            self.last_child.insert(parent, position);
        }
        self.emitted.push(item);
        self.steps += 1;
        Ok(position)
    }

    /// Mark an attribute condition satisfied by the node at `position`;
    /// updates organization bookkeeping (a group is satisfied once all its
    /// members are).
    pub fn mark_satisfied(&mut self, cond: usize, position: usize) {
        debug_assert!(!self.satisfied_attr[cond], "satisfaction is monotone");
        self.satisfied_attr[cond] = true;
        self.matched_node[cond] = Some(position);
        let parent = self.replay.parent_recorded(position);
        for (g, members) in self.orgs.iter().enumerate() {
            if !members.contains(&cond) {
                continue;
            }
            if self.org_parent[g].is_none() {
                self.org_parent[g] = Some(parent);
            }
            if members.iter().all(|&c| self.satisfied_attr[c]) {
                self.satisfied_org[g] = true;
            }
        }
    }

    /// Which attribute conditions substep 2 may select right now: unsatisfied
    /// ones whose organization groups (if any member already matched) point
    /// at the current pending parent.
    pub fn selection_candidates(&self) -> Vec<bool> {
        let pending = self.pending_parent();
        self.satisfied_attr
            .iter()
            .enumerate()
            .map(|(c, &sat)| {
                if sat {
                    return false;
                }
                for (g, members) in self.orgs.iter().enumerate() {
                    if members.contains(&c) {
                        if let Some(parent) = self.org_parent[g] {
                            if parent != pending {
                                return false;
                            }
                        }
                    }
                }
                true
            })
            .collect()
    }

    pub fn any_candidate(&self) -> bool {
        self.selection_candidates().iter().any(|&b| b)
    }

    pub fn all_attr_satisfied(&self) -> bool {
        self.satisfied_attr.iter().all(|&b| b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use layout_seq::SeqNode;

    fn node(leaf: bool, last: bool) -> SeqItem {
        SeqItem::Node(SeqNode { x: 0, y: 0, w: 1, h: 1, t: 0, leaf, last_child: last })
    }

    #[test]
    fn satisfaction_is_monotone_and_orgs_complete() {
        let mut st = GenerationState::new(3, vec![vec![0, 1]]);
        st.push(node(false, true)).unwrap();
        st.push(SeqItem::LevelSep).unwrap();
        let p1 = st.push(node(true, false)).unwrap();
        st.mark_satisfied(0, p1);
        assert!(st.satisfied().attr[0]);
        assert!(!st.satisfied().org[0]);
        let p2 = st.push(node(true, false)).unwrap();
        st.mark_satisfied(1, p2);
        assert!(st.satisfied().org[0]);
        assert!(st.satisfied().attr.iter().filter(|&&b| b).count() == 2);
    }

    #[test]
    fn org_restricts_candidates_to_the_matched_parent() {
        // root -> (A internal, B internal); conditions 0,1 in one group
        let mut st = GenerationState::new(2, vec![vec![0, 1]]);
        st.push(node(false, true)).unwrap(); // root
        st.push(SeqItem::LevelSep).unwrap();
        st.push(node(false, false)).unwrap(); // A at pos 2
        st.push(node(false, true)).unwrap(); // B at pos 3
        st.push(SeqItem::LevelSep).unwrap();
        let leaf = st.push(node(true, true)).unwrap(); // closes A
        st.mark_satisfied(0, leaf);
        // pending parent is now B, but the group matched under A
        assert_eq!(st.pending_parent(), Some(3));
        assert_eq!(st.selection_candidates(), vec![false, false]);
    }

    #[test]
    fn sibling_tracking_follows_the_pending_parent() {
        let mut st = GenerationState::new(0, vec![]);
        assert_eq!(st.round_context(), RoundContext { prefix_len: 0, parent_item: None, sibling_item: None });
        st.push(node(false, true)).unwrap();
        st.push(SeqItem::LevelSep).unwrap();
        let ctx = st.round_context();
        assert_eq!(ctx.parent_item, Some(0));
        assert_eq!(ctx.sibling_item, None);
        let first = st.push(node(true, false)).unwrap();
        let ctx = st.round_context();
        assert_eq!(ctx.sibling_item, Some(first));
    }
}

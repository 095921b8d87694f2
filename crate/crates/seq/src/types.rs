use layout_core::Violation;
use thiserror::Error;

/// One serialized node: the five quantized attributes plus the two structural
/// flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeqNode {
    pub x: u16,
    pub y: u16,
    pub w: u16,
    pub h: u16,
    pub t: u16,
    /// True when the node contributed no children during serialization.
    pub leaf: bool,
    /// True when the node is the last child of its parent (the root counts as
    /// the last child of a virtual parent).
    pub last_child: bool,
}

impl SeqNode {
    pub fn attrs(&self) -> [u16; 5] {
        [self.x, self.y, self.w, self.h, self.t]
    }
}

/// Sequence item: a node or the level separator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqItem {
    Node(SeqNode),
    /// The `<nl>` token between adjacent levels.
    LevelSep,
}

impl SeqItem {
    pub fn as_node(&self) -> Option<&SeqNode> {
        match self {
            SeqItem::Node(n) => Some(n),
            SeqItem::LevelSep => None,
        }
    }
}

/// A serialized layout.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    pub items: Vec<SeqItem>,
}

impl TokenSequence {
    pub fn new(items: Vec<SeqItem>) -> Self {
        Self { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, &SeqNode)> {
        self.items.iter().enumerate().filter_map(|(i, it)| it.as_node().map(|n| (i, n)))
    }

    /// Text dump, one token per line: `x y w h t b1 b2` or `NL`.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            match item {
                SeqItem::LevelSep => out.push_str("NL\n"),
                SeqItem::Node(n) => {
                    out.push_str(&format!(
                        "{} {} {} {} {} {} {}\n",
                        n.x, n.y, n.w, n.h, n.t, n.leaf as u8, n.last_child as u8
                    ));
                }
            }
        }
        out
    }

    /// Parse the text dump format produced by [`TokenSequence::to_dump`].
    pub fn from_dump(text: &str) -> Result<Self, SeqError> {
        let mut items = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line == "NL" {
                items.push(SeqItem::LevelSep);
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 7 {
                return Err(SeqError::Malformed {
                    position: lineno,
                    reason: MalformedReason::BadDumpLine(line.to_string()),
                });
            }
            let parse = |s: &str| -> Result<u16, SeqError> {
                s.parse().map_err(|_| SeqError::Malformed {
                    position: lineno,
                    reason: MalformedReason::BadDumpLine(line.to_string()),
                })
            };
            items.push(SeqItem::Node(SeqNode {
                x: parse(fields[0])?,
                y: parse(fields[1])?,
                w: parse(fields[2])?,
                h: parse(fields[3])?,
                t: parse(fields[4])?,
                leaf: parse(fields[5])? != 0,
                last_child: parse(fields[6])? != 0,
            }));
        }
        Ok(Self { items })
    }
}

/// Why a sequence (or prefix) fails to replay into a tree.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MalformedReason {
    #[error("sequence is empty")]
    EmptySequence,
    #[error("sequence starts with a level separator")]
    LeadingSeparator,
    #[error("more than one node at the root level")]
    MultipleRoots,
    #[error("the root node must carry the last-child flag")]
    RootWithoutLastFlag,
    #[error("node appears after all parent groups of its level were closed")]
    NodeAfterParentsExhausted,
    #[error("level separator before all parent groups were closed")]
    SeparatorBeforeGroupsClosed,
    #[error("sequence ended before all parent groups were closed")]
    UnclosedParentGroup,
    #[error("internal nodes at the final level have no following level")]
    DanglingInternalNodes,
    #[error("item appears after the terminating separator")]
    ItemAfterTerminator,
    #[error("unparseable dump line: {0}")]
    BadDumpLine(String),
}

/// Errors of the sequence layer.
#[derive(Debug, Error)]
pub enum SeqError {
    /// The input tree violates core invariants; serialization refuses it.
    #[error("invalid tree: {}", format_violations(.0))]
    InvalidTree(Vec<Violation>),

    /// The sequence breaks the serialization invariants at `position`.
    #[error("malformed sequence at position {position}: {reason}")]
    Malformed { position: usize, reason: MalformedReason },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

use serde::{Deserialize, Serialize};

/// Sentinel shown in dumps for a masked attribute slot.
pub const MASKED: &str = "<m>";

/// A per-element constraint on any subset of `{x, y, w, h, t}`.
///
/// `None` marks an unspecified attribute (the mask token).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AttrCondition {
    pub x: Option<u16>,
    pub y: Option<u16>,
    pub w: Option<u16>,
    pub h: Option<u16>,
    pub t: Option<u16>,
}

impl AttrCondition {
    pub fn fully_masked() -> Self {
        Self::default()
    }

    pub fn is_fully_specified(&self) -> bool {
        self.x.is_some() && self.y.is_some() && self.w.is_some() && self.h.is_some() && self.t.is_some()
    }

    /// True when every specified attribute equals the node tuple
    /// `(x, y, w, h, t)`.
    pub fn matches(&self, x: u16, y: u16, w: u16, h: u16, t: u16) -> bool {
        self.x.map_or(true, |v| v == x)
            && self.y.map_or(true, |v| v == y)
            && self.w.map_or(true, |v| v == w)
            && self.h.map_or(true, |v| v == h)
            && self.t.map_or(true, |v| v == t)
    }

    pub fn as_array(&self) -> [Option<u16>; 5] {
        [self.x, self.y, self.w, self.h, self.t]
    }
}

/// Attribute conditions plus organization (forced-sibling) groups; the
/// end-of-conditions terminator is implicit.
///
/// `provenance[i]`, when present, is the serialized position of the node the
/// i-th attribute condition was derived from; it is the teacher-forcing
/// selection target and is absent on externally authored condition sets.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConditionSet {
    pub attributes: Vec<AttrCondition>,
    /// Index sets into `attributes`; each group constrains its members to be
    /// siblings in the generated tree.
    pub organizations: Vec<Vec<usize>>,
    #[serde(default)]
    pub provenance: Vec<Option<usize>>,
}

impl ConditionSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_attributes(attributes: Vec<AttrCondition>) -> Self {
        let provenance = vec![None; attributes.len()];
        Self { attributes, organizations: Vec::new(), provenance }
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty() && self.organizations.is_empty()
    }

    /// Validate organization groups: every member index in range, at least
    /// two members per group, and provenance aligned when present.
    pub fn check(&self) -> Result<(), String> {
        for (j, group) in self.organizations.iter().enumerate() {
            if group.len() < 2 {
                return Err(format!("organization group {j} has fewer than 2 members"));
            }
            for &m in group {
                if m >= self.attributes.len() {
                    return Err(format!(
                        "organization group {j} references condition {m} out of {}",
                        self.attributes.len()
                    ));
                }
            }
        }
        if !self.provenance.is_empty() && self.provenance.len() != self.attributes.len() {
            return Err("provenance length differs from attribute-condition count".into());
        }
        Ok(())
    }
}

/// The seven supported generation tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    /// Generation conditioned on element types.
    GenT,
    /// Generation conditioned on element types and sizes.
    GenTS,
    /// Unconstrained generation.
    UGen,
    /// Completion from given (fully specified) leading elements.
    Completion,
    /// Structure extraction from a complete element set.
    StructExtr,
    /// Generation conditioned on element organizations.
    GenO,
    /// Structure transfer from a reference layout onto given elements.
    StructTran,
}

impl TaskKind {
    pub const ALL: [TaskKind; 7] = [
        TaskKind::GenT,
        TaskKind::GenTS,
        TaskKind::UGen,
        TaskKind::Completion,
        TaskKind::StructExtr,
        TaskKind::GenO,
        TaskKind::StructTran,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::GenT => "gent",
            TaskKind::GenTS => "gents",
            TaskKind::UGen => "ugen",
            TaskKind::Completion => "completion",
            TaskKind::StructExtr => "structextr",
            TaskKind::GenO => "geno",
            TaskKind::StructTran => "structtran",
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown task `{s}` (expected one of gent, gents, ugen, completion, structextr, geno, structtran)"))
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

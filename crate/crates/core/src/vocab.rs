use crate::CoreError;
use serde::{Deserialize, Serialize};

/// Whether an element type may hold children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeKind {
    /// A visible graphic element (text, image, icon, ...).
    Leaf,
    /// A container describing how its children are organized.
    Internal,
}

/// One entry of the type vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeEntry {
    pub name: String,
    pub kind: TypeKind,
}

/// Ordered element-type alphabet. Node type attributes are indices into it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeVocabulary {
    entries: Vec<TypeEntry>,
}

impl TypeVocabulary {
    /// Build a vocabulary from `(name, kind)` pairs.
    ///
    /// Names must be unique and at least one leaf and one internal kind must
    /// be present.
    pub fn new<I, S>(entries: I) -> Result<Self, CoreError>
    where
        I: IntoIterator<Item = (S, TypeKind)>,
        S: Into<String>,
    {
        let entries: Vec<TypeEntry> = entries
            .into_iter()
            .map(|(name, kind)| TypeEntry { name: name.into(), kind })
            .collect();
        let mut seen = std::collections::HashSet::new();
        for e in &entries {
            if !seen.insert(e.name.as_str().to_owned()) {
                return Err(CoreError::InvalidVocabulary(format!(
                    "duplicate type name `{}`",
                    e.name
                )));
            }
        }
        if !entries.iter().any(|e| e.kind == TypeKind::Leaf) {
            return Err(CoreError::InvalidVocabulary("no leaf kind present".into()));
        }
        if !entries.iter().any(|e| e.kind == TypeKind::Internal) {
            return Err(CoreError::InvalidVocabulary("no internal kind present".into()));
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TypeEntry] {
        &self.entries
    }

    pub fn name(&self, index: u16) -> Option<&str> {
        self.entries.get(index as usize).map(|e| e.name.as_str())
    }

    pub fn kind(&self, index: u16) -> Option<TypeKind> {
        self.entries.get(index as usize).map(|e| e.kind)
    }

    pub fn is_internal(&self, index: u16) -> bool {
        self.kind(index) == Some(TypeKind::Internal)
    }

    pub fn is_leaf(&self, index: u16) -> bool {
        self.kind(index) == Some(TypeKind::Leaf)
    }

    pub fn index_of(&self, name: &str) -> Option<u16> {
        self.entries.iter().position(|e| e.name == name).map(|i| i as u16)
    }

    /// Index of the first internal kind; used as the synthetic-root type.
    pub fn first_internal(&self) -> u16 {
        self.entries
            .iter()
            .position(|e| e.kind == TypeKind::Internal)
            .expect("vocabulary has an internal kind") as u16
    }

    /// The 33 RICO element types. Container-like types are marked internal;
    /// the remainder leaf.
    pub fn rico() -> Self {
        const INTERNAL: &[&str] = &[
            "View",
            "LinearLayout",
            "RelativeLayout",
            "FrameLayout",
            "ListView",
            "GridView",
            "Card",
            "ListItem",
            "RecyclerView",
            "ViewPager",
            "Drawer",
            "ButtonBar",
            "Toolbar",
            "MultiTab",
            "BottomNavigation",
        ];
        const LEAF: &[&str] = &[
            "WebView",
            "Advertisement",
            "TextButton",
            "Icon",
            "DatePicker",
            "Modal",
            "Text",
            "Image",
            "Video",
            "Checkbox",
            "Input",
            "BackgroundImage",
            "NumberStepper",
            "MapView",
            "OnOffSwitch",
            "Slider",
            "RadioButton",
            "PagerIndicator",
        ];
        let entries = INTERNAL
            .iter()
            .map(|n| (*n, TypeKind::Internal))
            .chain(LEAF.iter().map(|n| (*n, TypeKind::Leaf)));
        Self::new(entries).expect("rico preset is valid")
    }

    /// The 7 WebForest element types.
    pub fn webforest() -> Self {
        Self::new([
            ("Root", TypeKind::Internal),
            ("Container", TypeKind::Internal),
            ("Image", TypeKind::Leaf),
            ("Text", TypeKind::Leaf),
            ("Button", TypeKind::Leaf),
            ("Graphic", TypeKind::Leaf),
            ("Input", TypeKind::Leaf),
        ])
        .expect("webforest preset is valid")
    }

    /// Compact vocabulary used by the synthetic corpus grammar.
    pub fn synthetic() -> Self {
        Self::new([
            ("LinearH", TypeKind::Internal),
            ("LinearV", TypeKind::Internal),
            ("Grid", TypeKind::Internal),
            ("List", TypeKind::Internal),
            ("Frame", TypeKind::Internal),
            ("Text", TypeKind::Leaf),
            ("Image", TypeKind::Leaf),
            ("Icon", TypeKind::Leaf),
            ("Button", TypeKind::Leaf),
            ("Input", TypeKind::Leaf),
        ])
        .expect("synthetic preset is valid")
    }
}

//! On-disk task request and report formats.

use crate::generate::GenerationResult;
use crate::TaskError;
use layout_core::{AttrCondition, ConditionSet, LayoutTree, QuantGrid, TypeVocabulary};
use layout_model::{DecodeMode, DecodeOptions};
use serde::{Deserialize, Serialize};

/// A task request file:
/// `{"task": ..., "seed": ..., "decode": {...}, "conditions": {...},
///   "source": path, "reference": path}`.
/// Condition boxes are in layout units (like layout JSON); nulls mark masked
/// slots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskRequestFile {
    pub task: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub decode: Option<DecodeSpec>,
    #[serde(default)]
    pub conditions: Option<ConditionsSpec>,
    #[serde(default)]
    pub source: Option<String>,
    #[serde(default)]
    pub reference: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecodeSpec {
    pub mode: DecodeMode,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

fn default_temperature() -> f64 {
    1.0
}

fn default_top_k() -> usize {
    5
}

impl DecodeSpec {
    pub fn to_options(&self, seed: u64) -> DecodeOptions {
        DecodeOptions { mode: self.mode, temperature: self.temperature, top_k: self.top_k, seed }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionsSpec {
    #[serde(default)]
    pub attributes: Vec<AttrSpec>,
    #[serde(default)]
    pub organizations: Vec<Vec<usize>>,
}

/// One attribute condition with masked slots as nulls; the box is
/// `[x, y, w, h]` in layout units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttrSpec {
    #[serde(rename = "type")]
    pub type_name: Option<String>,
    #[serde(rename = "box", default)]
    pub bbox: [Option<f64>; 4],
}

impl ConditionsSpec {
    pub fn resolve(
        &self,
        vocabulary: &TypeVocabulary,
        grid: &QuantGrid,
    ) -> Result<ConditionSet, TaskError> {
        let mut attributes = Vec::with_capacity(self.attributes.len());
        for spec in &self.attributes {
            let t = match &spec.type_name {
                None => None,
                Some(name) => Some(vocabulary.index_of(name).ok_or_else(|| {
                    TaskError::InvalidConditions(format!("unknown type `{name}`"))
                })?),
            };
            attributes.push(AttrCondition {
                x: spec.bbox[0].map(|v| grid.quantize_attr(0, v)),
                y: spec.bbox[1].map(|v| grid.quantize_attr(1, v)),
                w: spec.bbox[2].map(|v| grid.quantize_attr(2, v)),
                h: spec.bbox[3].map(|v| grid.quantize_attr(3, v)),
                t,
            });
        }
        let provenance = vec![None; attributes.len()];
        let cond =
            ConditionSet { attributes, organizations: self.organizations.clone(), provenance };
        cond.check().map_err(TaskError::InvalidConditions)?;
        Ok(cond)
    }
}

/// The satisfaction report written next to generated layouts.
#[derive(Debug, Clone, Serialize)]
pub struct ResultReport {
    pub task: String,
    pub seed: u64,
    pub truncated: bool,
    pub conditions: Vec<ConditionOutcome>,
    pub repairs: usize,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionOutcome {
    pub index: usize,
    pub satisfied: bool,
    pub node_path: Option<Vec<usize>>,
}

impl ResultReport {
    pub fn new(task: &str, seed: u64, result: &GenerationResult) -> Self {
        Self {
            task: task.to_string(),
            seed,
            truncated: result.truncated,
            conditions: result
                .satisfaction
                .iter()
                .enumerate()
                .map(|(index, c)| ConditionOutcome {
                    index,
                    satisfied: c.satisfied,
                    node_path: c.node_path.clone(),
                })
                .collect(),
            repairs: result.repair_log.len(),
            z: result.z.clone(),
        }
    }
}

/// Convenience: read a layout JSON file against a vocabulary and bin grid.
pub fn load_layout(
    path: &std::path::Path,
    vocabulary: std::sync::Arc<TypeVocabulary>,
    grid: &QuantGrid,
) -> Result<LayoutTree, TaskError> {
    layout_core::read_layout_file(path, vocabulary, grid).map_err(TaskError::Layout)
}

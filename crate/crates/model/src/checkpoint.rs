use crate::config::{LayoutSpace, ModelConfig};
use crate::{Model, ModelError};
use layout_core::{QuantGrid, TypeEntry, TypeVocabulary};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Self-describing checkpoint: configuration, the categorical space, and all
/// parameter tensors keyed by stable names.
#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    config: ModelConfig,
    vocabulary: Vec<TypeEntry>,
    grid: QuantGrid,
    params: Vec<TensorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    train_state: Option<serde_json::Value>,
}

/// Write the model (plus optional opaque training state) to `path`.
pub fn save(model: &Model, path: &Path, train_state: Option<serde_json::Value>) -> Result<(), ModelError> {
    let params = model
        .params
        .iter()
        .map(|(_, name, v)| TensorEntry {
            name: name.to_string(),
            rows: v.nrows(),
            cols: v.ncols(),
            data: v.iter().copied().collect(),
        })
        .collect();
    let file = CheckpointFile {
        version: CHECKPOINT_VERSION,
        config: model.config.clone(),
        vocabulary: model.space.vocabulary.entries().to_vec(),
        grid: (*model.space.grid).clone(),
        params,
        train_state,
    };
    let text = serde_json::to_string(&file)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Load a checkpoint; every parameter of the rebuilt model must be present
/// with a matching shape.
pub fn load(path: &Path) -> Result<(Model, Option<serde_json::Value>), ModelError> {
    let text = std::fs::read_to_string(path)?;
    let file: CheckpointFile = serde_json::from_str(&text)?;
    if file.version != CHECKPOINT_VERSION {
        return Err(ModelError::Checkpoint(format!(
            "unsupported version {} (expected {CHECKPOINT_VERSION})",
            file.version
        )));
    }
    let vocabulary = TypeVocabulary::new(file.vocabulary.iter().map(|e| (e.name.clone(), e.kind)))
        .map_err(|e| ModelError::Checkpoint(format!("bad vocabulary: {e}")))?;
    let space = LayoutSpace::new(Arc::new(vocabulary), Arc::new(file.grid.clone()));
    let mut model = Model::new(file.config.clone(), space, 0);

    let mut by_name: std::collections::HashMap<&str, &TensorEntry> =
        file.params.iter().map(|t| (t.name.as_str(), t)).collect();
    let ids: Vec<_> = model.params.ids().collect();
    for id in ids {
        let name = model.params.name(id).to_string();
        let entry = by_name.remove(name.as_str()).ok_or_else(|| {
            ModelError::Checkpoint(format!("parameter `{name}` missing from checkpoint"))
        })?;
        let expected = model.params.value(id).raw_dim();
        if (entry.rows, entry.cols) != (expected[0], expected[1]) {
            return Err(ModelError::Checkpoint(format!(
                "parameter `{name}` has shape {}x{}, expected {}x{}",
                entry.rows, entry.cols, expected[0], expected[1]
            )));
        }
        let arr = Array2::from_shape_vec((entry.rows, entry.cols), entry.data.clone())
            .map_err(|e| ModelError::Checkpoint(format!("parameter `{name}`: {e}")))?;
        *model.params.value_mut(id) = arr;
    }
    if !by_name.is_empty() {
        let extras: Vec<&str> = by_name.keys().copied().collect();
        return Err(ModelError::Checkpoint(format!("unknown parameters: {extras:?}")));
    }
    Ok((model, file.train_state))
}

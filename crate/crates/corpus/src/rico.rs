//! Converter from the public RICO semantic-annotation JSON to the layout
//! schema used here.
//!
//! RICO nodes carry absolute pixel `bounds: [left, top, right, bottom]` and a
//! `componentLabel` (semantic annotations) or `class` (raw view hierarchies);
//! the root bounds define the canvas. This converter only reshapes the data:
//! unknown labels are kept verbatim and left for ingestion to filter against
//! the active vocabulary.

use layout_core::{CoreError, RawLayout, RawNode};
use serde_json::Value;

/// Convert one RICO-style hierarchy value into the layout schema.
pub fn convert_rico_value(v: &Value) -> Result<RawLayout, CoreError> {
    let root_bounds = bounds_of(v, "/")?;
    let canvas = [root_bounds[2] - root_bounds[0], root_bounds[3] - root_bounds[1]];
    if !(canvas[0] > 0.0 && canvas[1] > 0.0) {
        return Err(CoreError::SchemaMismatch {
            pointer: "/bounds".into(),
            message: "root bounds have non-positive extent".into(),
        });
    }
    let origin = [root_bounds[0], root_bounds[1]];
    let root = convert_node(v, origin, canvas, "/")?;
    Ok(RawLayout { canvas, root })
}

fn convert_node(v: &Value, origin: [f64; 2], canvas: [f64; 2], pointer: &str) -> Result<RawNode, CoreError> {
    let b = bounds_of(v, pointer)?;
    let x = (b[0] - origin[0]).clamp(0.0, canvas[0]);
    let y = (b[1] - origin[1]).clamp(0.0, canvas[1]);
    let w = (b[2] - b[0]).max(1.0).min(canvas[0] - x.min(canvas[0] - 1.0));
    let h = (b[3] - b[1]).max(1.0).min(canvas[1] - y.min(canvas[1] - 1.0));
    let type_name = v
        .get("componentLabel")
        .or_else(|| v.get("class"))
        .and_then(Value::as_str)
        .unwrap_or("View")
        .to_string();
    let mut children = Vec::new();
    if let Some(cs) = v.get("children").and_then(Value::as_array) {
        for (i, c) in cs.iter().enumerate() {
            if c.is_null() {
                continue;
            }
            children.push(convert_node(c, origin, canvas, &format!("{pointer}children/{i}/"))?);
        }
    }
    Ok(RawNode { type_name, bbox: [x, y, w, h], children })
}

fn bounds_of(v: &Value, pointer: &str) -> Result<[f64; 4], CoreError> {
    let arr = v
        .get("bounds")
        .and_then(Value::as_array)
        .ok_or_else(|| CoreError::SchemaMismatch {
            pointer: format!("{pointer}bounds"),
            message: "expected an array of 4 numbers".into(),
        })?;
    if arr.len() != 4 {
        return Err(CoreError::SchemaMismatch {
            pointer: format!("{pointer}bounds"),
            message: format!("expected 4 numbers, got {}", arr.len()),
        });
    }
    let mut out = [0.0; 4];
    for (i, item) in arr.iter().enumerate() {
        out[i] = item.as_f64().ok_or_else(|| CoreError::SchemaMismatch {
            pointer: format!("{pointer}bounds/{i}"),
            message: "expected a number".into(),
        })?;
    }
    Ok(out)
}

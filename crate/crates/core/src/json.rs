use crate::{CoreError, LayoutNode, LayoutTree, QuantGrid, TypeVocabulary};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;
use std::sync::Arc;

/// On-disk layout schema:
/// `{"canvas": [W, H], "root": {"type": str, "box": [x, y, w, h], "children": [...]}}`
/// with boxes in layout units, pre-quantization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawLayout {
    pub canvas: [f64; 2],
    pub root: RawNode,
}

/// One node of the on-disk schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawNode {
    #[serde(rename = "type")]
    pub type_name: String,
    #[serde(rename = "box")]
    pub bbox: [f64; 4],
    #[serde(default)]
    pub children: Vec<RawNode>,
}

fn mismatch(pointer: &str, message: impl Into<String>) -> CoreError {
    CoreError::SchemaMismatch { pointer: pointer.to_string(), message: message.into() }
}

fn parse_number(v: &Value, pointer: &str) -> Result<f64, CoreError> {
    v.as_f64().ok_or_else(|| mismatch(pointer, "expected a number"))
}

fn parse_node(v: &Value, pointer: &str) -> Result<RawNode, CoreError> {
    let obj = v.as_object().ok_or_else(|| mismatch(pointer, "expected an object"))?;
    let type_name = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| mismatch(&format!("{pointer}/type"), "expected a string"))?
        .to_string();
    let bx = obj
        .get("box")
        .and_then(Value::as_array)
        .ok_or_else(|| mismatch(&format!("{pointer}/box"), "expected an array of 4 numbers"))?;
    if bx.len() != 4 {
        return Err(mismatch(&format!("{pointer}/box"), format!("expected 4 numbers, got {}", bx.len())));
    }
    let mut bbox = [0.0; 4];
    for (i, item) in bx.iter().enumerate() {
        bbox[i] = parse_number(item, &format!("{pointer}/box/{i}"))?;
    }
    let mut children = Vec::new();
    if let Some(cs) = obj.get("children") {
        let cs = cs
            .as_array()
            .ok_or_else(|| mismatch(&format!("{pointer}/children"), "expected an array"))?;
        for (i, c) in cs.iter().enumerate() {
            children.push(parse_node(c, &format!("{pointer}/children/{i}"))?);
        }
    }
    Ok(RawNode { type_name, bbox, children })
}

/// Parse a layout JSON value into the raw (unresolved, unquantized) schema,
/// reporting schema mismatches with a JSON pointer.
pub fn parse_raw_layout(v: &Value) -> Result<RawLayout, CoreError> {
    let obj = v.as_object().ok_or_else(|| mismatch("", "expected an object"))?;
    let canvas = obj
        .get("canvas")
        .and_then(Value::as_array)
        .ok_or_else(|| mismatch("/canvas", "expected an array of 2 numbers"))?;
    if canvas.len() != 2 {
        return Err(mismatch("/canvas", format!("expected 2 numbers, got {}", canvas.len())));
    }
    let w = parse_number(&canvas[0], "/canvas/0")?;
    let h = parse_number(&canvas[1], "/canvas/1")?;
    if !(w > 0.0 && h > 0.0) {
        return Err(mismatch("/canvas", "canvas extents must be positive"));
    }
    let root = parse_node(obj.get("root").ok_or_else(|| mismatch("/root", "missing"))?, "/root")?;
    Ok(RawLayout { canvas: [w, h], root })
}

fn resolve_node(
    raw: &RawNode,
    vocab: &TypeVocabulary,
    grid: &QuantGrid,
    pointer: &str,
) -> Result<LayoutNode, CoreError> {
    let t = vocab
        .index_of(&raw.type_name)
        .ok_or_else(|| mismatch(&format!("{pointer}/type"), format!("unknown type `{}`", raw.type_name)))?;
    let q = grid.quantize_box(raw.bbox)?;
    let mut children = Vec::with_capacity(raw.children.len());
    for (i, c) in raw.children.iter().enumerate() {
        children.push(resolve_node(c, vocab, grid, &format!("{pointer}/children/{i}"))?);
    }
    Ok(LayoutNode { x: q[0], y: q[1], w: q[2], h: q[3], t, children })
}

/// Resolve and quantize a raw layout into a [`LayoutTree`].
///
/// The grid takes its bin counts from `bins_template` and its canvas extent
/// from the file, so files with different screen sizes quantize onto the same
/// categorical alphabet. Unknown type names are an error here; lenient
/// ingestion (dropping unknown subtrees) is a corpus-level policy.
pub fn layout_from_json(
    raw: &RawLayout,
    vocabulary: Arc<TypeVocabulary>,
    bins_template: &QuantGrid,
) -> Result<LayoutTree, CoreError> {
    let grid = Arc::new(QuantGrid {
        bins_x: bins_template.bins_x,
        bins_y: bins_template.bins_y,
        bins_w: bins_template.bins_w,
        bins_h: bins_template.bins_h,
        canvas_w: raw.canvas[0],
        canvas_h: raw.canvas[1],
    });
    let root = resolve_node(&raw.root, &vocabulary, &grid, "/root")?;
    Ok(LayoutTree::new(root, vocabulary, grid))
}

fn node_to_raw(node: &LayoutNode, tree: &LayoutTree) -> RawNode {
    RawNode {
        type_name: tree.vocabulary.name(node.t).unwrap_or("?").to_string(),
        bbox: tree.grid.dequantize_box(node.quantized_box()),
        children: node.children.iter().map(|c| node_to_raw(c, tree)).collect(),
    }
}

/// Export a tree back to the on-disk schema (boxes dequantized to layout units).
pub fn layout_to_json(tree: &LayoutTree) -> RawLayout {
    RawLayout {
        canvas: [tree.grid.canvas_w, tree.grid.canvas_h],
        root: node_to_raw(&tree.root, tree),
    }
}

/// Read one `*.layout.json` file.
pub fn read_layout_file(
    path: &Path,
    vocabulary: Arc<TypeVocabulary>,
    bins_template: &QuantGrid,
) -> Result<LayoutTree, CoreError> {
    let text = std::fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text)?;
    let raw = parse_raw_layout(&value)?;
    layout_from_json(&raw, vocabulary, bins_template)
}

/// Write a tree as pretty-printed layout JSON.
pub fn write_layout_file(path: &Path, tree: &LayoutTree) -> Result<(), CoreError> {
    let raw = layout_to_json(tree);
    let text = serde_json::to_string_pretty(&raw)?;
    std::fs::write(path, text)?;
    Ok(())
}

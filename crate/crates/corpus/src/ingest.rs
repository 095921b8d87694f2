use crate::CorpusConfig;
use layout_core::{
    layout_from_json, parse_raw_layout, validate_tree, CoreError, LayoutTree, RawLayout, RawNode,
};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// Ingestion failure: the file could not be read or does not match the layout
/// schema. Filtering (size caps, unknown types) never raises; it is reported.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: CoreError,
    },
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// What happened during ingestion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub files: usize,
    pub kept: usize,
    pub dropped: usize,
    /// Drop reasons: `too_many_nodes`, `too_deep`, `unknown_root_type`,
    /// `invalid_geometry`, `kind_mismatch`.
    pub drop_reasons: BTreeMap<String, usize>,
    /// Nodes discarded (with their subtrees) because their type is not in the
    /// vocabulary.
    pub nodes_dropped: usize,
}

impl IngestReport {
    fn drop(&mut self, reason: &str) {
        self.dropped += 1;
        *self.drop_reasons.entry(reason.to_string()).or_insert(0) += 1;
    }
}

/// Ingest a directory of `*.layout.json` files.
///
/// Trees are quantized onto the configured bin counts (canvas extent comes
/// from each file), nodes with unknown types are dropped with their subtrees,
/// and trees are filtered against the node/depth caps. Files that do not
/// match the schema are an error; filtered trees are counted in the report.
pub fn ingest_rico_like(
    dir: &Path,
    config: &CorpusConfig,
) -> Result<(Vec<LayoutTree>, IngestReport), IngestError> {
    let mut paths: Vec<std::path::PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| IngestError::Io { path: dir.display().to_string(), source })?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".layout.json")))
        .collect();
    paths.sort();

    let mut report = IngestReport::default();
    let mut trees = Vec::new();
    for path in paths {
        report.files += 1;
        let text = std::fs::read_to_string(&path)
            .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| IngestError::File {
            path: path.display().to_string(),
            source: CoreError::Json(e),
        })?;
        let raw = parse_raw_layout(&value).map_err(|source| IngestError::File {
            path: path.display().to_string(),
            source,
        })?;
        match resolve_filtered(&raw, config, &mut report) {
            Some(tree) => {
                trees.push(tree);
                report.kept += 1;
            }
            None => {}
        }
    }
    Ok((trees, report))
}

/// Resolve one raw layout while dropping unknown-type subtrees; apply caps.
fn resolve_filtered(
    raw: &RawLayout,
    config: &CorpusConfig,
    report: &mut IngestReport,
) -> Option<LayoutTree> {
    if config.vocabulary.index_of(&raw.root.type_name).is_none() {
        report.drop("unknown_root_type");
        report.nodes_dropped += count_nodes(&raw.root);
        return None;
    }
    let mut filtered_root = raw.root.clone();
    let dropped = drop_unknown(&mut filtered_root, &config.vocabulary);
    report.nodes_dropped += dropped;
    let filtered = RawLayout { canvas: raw.canvas, root: filtered_root };

    let tree = match layout_from_json(&filtered, config.vocabulary.clone(), &config.grid) {
        Ok(t) => t,
        Err(_) => {
            report.drop("invalid_geometry");
            return None;
        }
    };
    if tree.node_count() > config.max_nodes {
        report.drop("too_many_nodes");
        return None;
    }
    if tree.depth() > config.max_depth {
        report.drop("too_deep");
        return None;
    }
    if !validate_tree(&tree).is_empty() {
        report.drop("kind_mismatch");
        return None;
    }
    Some(tree)
}

fn count_nodes(node: &RawNode) -> usize {
    1 + node.children.iter().map(count_nodes).sum::<usize>()
}

fn drop_unknown(node: &mut RawNode, vocab: &layout_core::TypeVocabulary) -> usize {
    let mut dropped = 0;
    node.children.retain(|c| {
        if vocab.index_of(&c.type_name).is_none() {
            dropped += count_nodes(c);
            false
        } else {
            true
        }
    });
    for c in &mut node.children {
        dropped += drop_unknown(c, vocab);
    }
    dropped
}

#[cfg(test)]
mod tests {
    use super::*;
    use layout_core::write_layout_file;

    fn write_json(dir: &Path, name: &str, text: &str) {
        std::fs::write(dir.join(name), text).unwrap();
    }

    #[test]
    fn empty_directory_ingests_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let config = CorpusConfig::synthetic_defaults(1);
        let (trees, report) = ingest_rico_like(dir.path(), &config).unwrap();
        assert!(trees.is_empty());
        assert_eq!(report, IngestReport::default());
    }

    #[test]
    fn node_cap_drops_the_tree() {
        let dir = tempfile::tempdir().unwrap();
        write_json(
            dir.path(),
            "a.layout.json",
            r#"{"canvas": [100, 100], "root": {"type": "LinearV", "box": [0,0,100,100], "children": [
                {"type": "Text", "box": [0,0,10,10]},
                {"type": "Text", "box": [0,20,10,10]},
                {"type": "Text", "box": [0,40,10,10]}
            ]}}"#,
        );
        let mut config = CorpusConfig::synthetic_defaults(1);
        config.max_nodes = 3;
        let (trees, report) = ingest_rico_like(dir.path(), &config).unwrap();
        assert!(trees.is_empty());
        assert_eq!(report.kept, 0);
        assert_eq!(report.dropped, 1);
        assert_eq!(report.drop_reasons.get("too_many_nodes"), Some(&1));
    }

    #[test]
    fn unknown_subtrees_are_dropped_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        write_json(
            dir.path(),
            "a.layout.json",
            r#"{"canvas": [100, 100], "root": {"type": "LinearV", "box": [0,0,100,100], "children": [
                {"type": "Martian", "box": [0,0,10,10], "children": [{"type": "Text", "box": [0,0,5,5]}]},
                {"type": "Text", "box": [0,20,10,10]}
            ]}}"#,
        );
        let config = CorpusConfig::synthetic_defaults(1);
        let (trees, report) = ingest_rico_like(dir.path(), &config).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].node_count(), 2);
        assert_eq!(report.nodes_dropped, 2);
    }

    #[test]
    fn schema_mismatch_is_an_error_with_pointer() {
        let dir = tempfile::tempdir().unwrap();
        write_json(dir.path(), "bad.layout.json", r#"{"canvas": [100, 100]}"#);
        let config = CorpusConfig::synthetic_defaults(1);
        let err = ingest_rico_like(dir.path(), &config).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.layout.json"), "{msg}");
        assert!(msg.contains("/root"), "{msg}");
    }

    #[test]
    fn round_trips_written_fixture_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let spec = crate::SyntheticGrammarSpec::default_synthetic();
        let corpus = crate::generate_synthetic(&spec, 20, 77);
        for (i, tree) in corpus.iter().enumerate() {
            write_layout_file(&dir.path().join(format!("t{i:03}.layout.json")), tree).unwrap();
        }
        let config = CorpusConfig::synthetic_defaults(1);
        let (trees, report) = ingest_rico_like(dir.path(), &config).unwrap();
        assert_eq!(trees.len(), 20);
        assert_eq!(report.kept, 20);
        for t in &trees {
            assert!(validate_tree(t).is_empty());
        }
        // quantization of dequantized boxes reproduces the original bins
        for (orig, back) in corpus.iter().zip(&trees) {
            assert_eq!(orig.root, back.root);
        }
    }
}

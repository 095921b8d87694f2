//! Flat key-value configuration files (`key = value`, `#` comments) that
//! override built-in defaults for the corpus, model, and training knobs.

use layout_core::{QuantGrid, TypeVocabulary};
use layout_corpus::{CorpusConfig, SyntheticGrammarSpec};
use layout_model::ModelConfig;
use layout_train::TrainConfig;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, String> {
        match self.values.get(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| format!("bad value for `{key}`: {raw}")),
        }
    }

    pub fn vocabulary(&self) -> Result<Arc<TypeVocabulary>, String> {
        let name = self.values.get("vocab").map(String::as_str).unwrap_or("synthetic");
        match name {
            "synthetic" => Ok(Arc::new(TypeVocabulary::synthetic())),
            "rico" => Ok(Arc::new(TypeVocabulary::rico())),
            "webforest" => Ok(Arc::new(TypeVocabulary::webforest())),
            other => Err(format!("unknown vocab preset `{other}`")),
        }
    }

    pub fn grid(&self) -> Result<Arc<QuantGrid>, String> {
        let bins: u16 = self.get("bins", 64)?;
        Ok(Arc::new(QuantGrid {
            bins_x: self.get("bins_x", bins)?,
            bins_y: self.get("bins_y", bins)?,
            bins_w: self.get("bins_w", bins)?,
            bins_h: self.get("bins_h", bins)?,
            canvas_w: self.get("canvas_w", 64.0)?,
            canvas_h: self.get("canvas_h", 64.0)?,
        }))
    }

    pub fn corpus_config(&self, seed: u64) -> Result<CorpusConfig, String> {
        Ok(CorpusConfig {
            max_nodes: self.get("max_nodes", 30)?,
            max_depth: self.get("max_depth", 5)?,
            vocabulary: self.vocabulary()?,
            grid: self.grid()?,
            split_ratio: (self.get("split_train", 9)?, self.get("split_test", 1)?),
            seed,
        })
    }

    pub fn grammar(&self) -> Result<SyntheticGrammarSpec, String> {
        let mut spec = SyntheticGrammarSpec::new(self.vocabulary()?, self.grid()?);
        spec.gutter = self.get("gutter", spec.gutter)?;
        spec.padding = self.get("padding", spec.padding)?;
        spec.leaf_jitter = self.get("leaf_jitter", spec.leaf_jitter)?;
        spec.max_nodes = self.get("grammar_max_nodes", spec.max_nodes)?;
        if let Some(raw) = self.values.get("branching") {
            spec.branching = parse_distribution(raw).map_err(|e| format!("branching: {e}"))?;
        }
        if let Some(raw) = self.values.get("depth") {
            spec.depth = parse_distribution(raw).map_err(|e| format!("depth: {e}"))?;
        }
        Ok(spec)
    }

    pub fn model_config(&self) -> Result<ModelConfig, String> {
        let base = ModelConfig::desk();
        let config = ModelConfig {
            d_model: self.get("d_model", base.d_model)?,
            d_ff: self.get("d_ff", base.d_ff)?,
            gen_layers: self.get("gen_layers", base.gen_layers)?,
            enc_layers: self.get("enc_layers", base.enc_layers)?,
            d_z: self.get("d_z", base.d_z)?,
            heads: self.get("heads", base.heads)?,
            max_seq: self.get("max_seq", base.max_seq)?,
            use_local_context: self.get("use_local_context", true)?,
            use_global_context: self.get("use_global_context", true)?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn train_config(&self, seed: u64) -> Result<TrainConfig, String> {
        let base = TrainConfig::desk(seed);
        Ok(TrainConfig {
            epochs: self.get("epochs", base.epochs)?,
            batch_size: self.get("batch_size", base.batch_size)?,
            lr: self.get("lr", base.lr)?,
            beta: self.get("beta", base.beta)?,
            beta_warmup: self.get("beta_warmup", base.beta_warmup)?,
            seed,
            task_mix: base.task_mix,
            optimizer: base.optimizer,
            early_stop: base.early_stop,
        })
    }
}

/// Parse a weighted distribution written as `value:weight` pairs, e.g.
/// `2:0.5, 3:0.35, 4:0.15`.
fn parse_distribution(raw: &str) -> Result<Vec<(usize, f64)>, String> {
    raw.split(',')
        .map(|pair| {
            let (v, w) = pair.trim().split_once(':').ok_or("expected `value:weight`")?;
            let v = v.trim().parse().map_err(|_| format!("bad value `{v}`"))?;
            let w = w.trim().parse().map_err(|_| format!("bad weight `{w}`"))?;
            Ok((v, w))
        })
        .collect()
}

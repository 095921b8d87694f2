use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    Greedy,
    Sample,
}

/// Decoding knobs. Greedy mode ignores temperature and top-k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecodeOptions {
    pub mode: DecodeMode,
    pub temperature: f64,
    pub top_k: usize,
    pub seed: u64,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self { mode: DecodeMode::Sample, temperature: 1.0, top_k: 5, seed: 0 }
    }
}

impl DecodeOptions {
    pub fn greedy(seed: u64) -> Self {
        Self { mode: DecodeMode::Greedy, temperature: 1.0, top_k: 5, seed }
    }
}

/// Draw from categorical logits: argmax in greedy mode, otherwise
/// temperature-scaled softmax restricted to the top-k logits.
pub fn sample_categorical<R: Rng>(logits: &[f64], opts: &DecodeOptions, rng: &mut R) -> usize {
    debug_assert!(!logits.is_empty());
    match opts.mode {
        DecodeMode::Greedy => argmax(logits),
        DecodeMode::Sample => {
            let k = opts.top_k.clamp(1, logits.len());
            let mut order: Vec<usize> = (0..logits.len()).collect();
            order.sort_by(|&a, &b| logits[b].partial_cmp(&logits[a]).unwrap());
            let shortlist = &order[..k];
            let t = opts.temperature.max(1e-6);
            let max = logits[shortlist[0]];
            let weights: Vec<f64> =
                shortlist.iter().map(|&i| ((logits[i] - max) / t).exp()).collect();
            shortlist[weighted_index(&weights, rng)]
        }
    }
}

/// Draw a bernoulli decision from a logit.
pub fn sample_binary<R: Rng>(logit: f64, opts: &DecodeOptions, rng: &mut R) -> bool {
    let p = 1.0 / (1.0 + (-logit).exp());
    match opts.mode {
        DecodeMode::Greedy => p > 0.5,
        DecodeMode::Sample => rng.gen_bool(p.clamp(0.0, 1.0)),
    }
}

/// Draw from an explicit probability vector (the substep-2 selection
/// distribution); `allowed` masks out ineligible candidates.
pub fn sample_from_probs<R: Rng>(
    probs: &[f64],
    allowed: &[bool],
    opts: &DecodeOptions,
    rng: &mut R,
) -> Option<usize> {
    let masked: Vec<f64> =
        probs.iter().zip(allowed).map(|(p, &a)| if a { *p } else { 0.0 }).collect();
    let total: f64 = masked.iter().sum();
    if total <= 0.0 {
        return None;
    }
    Some(match opts.mode {
        DecodeMode::Greedy => argmax(&masked),
        DecodeMode::Sample => weighted_index(&masked, rng),
    })
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

fn weighted_index<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut roll = rng.gen_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if roll < *w {
            return i;
        }
        roll -= w;
    }
    weights.len() - 1
}

//! Pre-norm Transformer layers with externally supplied boolean attention
//! masks (`mask[[i, j]]` = receiver `i` may read sender `j`).

use super::params::{ParamId, ParamStore};
use super::tape::{Tape, Var};
use ndarray::Array2;
use rand::Rng;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct LayerParams {
    pub ln1_gain: ParamId,
    pub ln1_bias: ParamId,
    pub wq: ParamId,
    pub bq: ParamId,
    pub wk: ParamId,
    pub bk: ParamId,
    pub wv: ParamId,
    pub bv: ParamId,
    pub wo: ParamId,
    pub bo: ParamId,
    pub ln2_gain: ParamId,
    pub ln2_bias: ParamId,
    pub w_ff1: ParamId,
    pub b_ff1: ParamId,
    pub w_ff2: ParamId,
    pub b_ff2: ParamId,
}

/// A stack of identical layers plus the output normalization.
#[derive(Debug, Clone)]
pub struct StackParams {
    pub layers: Vec<LayerParams>,
    pub ln_out_gain: ParamId,
    pub ln_out_bias: ParamId,
    pub heads: usize,
    pub d_model: usize,
}

impl StackParams {
    pub fn create<R: Rng>(
        store: &mut ParamStore,
        rng: &mut R,
        prefix: &str,
        n_layers: usize,
        d_model: usize,
        d_ff: usize,
        heads: usize,
    ) -> Self {
        assert!(d_model % heads == 0, "d_model must be divisible by heads");
        let layers = (0..n_layers)
            .map(|l| {
                let p = |s: &str| format!("{prefix}.l{l}.{s}");
                LayerParams {
                    ln1_gain: store.add_ones(p("ln1.gain"), 1, d_model),
                    ln1_bias: store.add_zeros(p("ln1.bias"), 1, d_model),
                    wq: store.add_linear(rng, p("attn.wq"), d_model, d_model),
                    bq: store.add_zeros(p("attn.bq"), 1, d_model),
                    wk: store.add_linear(rng, p("attn.wk"), d_model, d_model),
                    bk: store.add_zeros(p("attn.bk"), 1, d_model),
                    wv: store.add_linear(rng, p("attn.wv"), d_model, d_model),
                    bv: store.add_zeros(p("attn.bv"), 1, d_model),
                    wo: store.add_linear(rng, p("attn.wo"), d_model, d_model),
                    bo: store.add_zeros(p("attn.bo"), 1, d_model),
                    ln2_gain: store.add_ones(p("ln2.gain"), 1, d_model),
                    ln2_bias: store.add_zeros(p("ln2.bias"), 1, d_model),
                    w_ff1: store.add_linear(rng, p("ff.w1"), d_model, d_ff),
                    b_ff1: store.add_zeros(p("ff.b1"), 1, d_ff),
                    w_ff2: store.add_linear(rng, p("ff.w2"), d_ff, d_model),
                    b_ff2: store.add_zeros(p("ff.b2"), 1, d_model),
                }
            })
            .collect();
        Self {
            layers,
            ln_out_gain: store.add_ones(format!("{prefix}.ln_out.gain"), 1, d_model),
            ln_out_bias: store.add_zeros(format!("{prefix}.ln_out.bias"), 1, d_model),
            heads,
            d_model,
        }
    }

    /// Run the stack over `x` (seq x d_model) with the same attention mask at
    /// every layer; returns normalized features at every position.
    pub fn forward(&self, tape: &mut Tape, x: Var, mask: &Arc<Array2<bool>>) -> Var {
        let mut h = x;
        for layer in &self.layers {
            h = self.layer_forward(tape, h, layer, mask);
        }
        let gain = tape.param(self.ln_out_gain);
        let bias = tape.param(self.ln_out_bias);
        tape.layer_norm(h, gain, bias)
    }

    /// Run only the first layer. Used by mask-soundness probes: across one
    /// layer a masked sender has exactly zero influence on its receiver,
    /// while deeper layers may pick up permitted transitive paths.
    pub fn forward_first_layer(&self, tape: &mut Tape, x: Var, mask: &Arc<Array2<bool>>) -> Var {
        self.layer_forward(tape, x, &self.layers[0], mask)
    }

    fn layer_forward(
        &self,
        tape: &mut Tape,
        x: Var,
        layer: &LayerParams,
        mask: &Arc<Array2<bool>>,
    ) -> Var {
        let d_head = self.d_model / self.heads;
        let scale = 1.0 / (d_head as f64).sqrt();

        let g1 = tape.param(layer.ln1_gain);
        let b1 = tape.param(layer.ln1_bias);
        let normed = tape.layer_norm(x, g1, b1);

        let linear = |tape: &mut Tape, input: Var, w: ParamId, b: ParamId| {
            let w = tape.param(w);
            let b = tape.param(b);
            let y = tape.matmul(input, w);
            tape.add_row(y, b)
        };
        let q = linear(tape, normed, layer.wq, layer.bq);
        let k = linear(tape, normed, layer.wk, layer.bk);
        let v = linear(tape, normed, layer.wv, layer.bv);

        let mut head_outputs = Vec::with_capacity(self.heads);
        for h in 0..self.heads {
            let qh = tape.cols(q, h * d_head, d_head);
            let kh = tape.cols(k, h * d_head, d_head);
            let vh = tape.cols(v, h * d_head, d_head);
            let scores = tape.matmul_nt(qh, kh);
            let scaled = tape.scale(scores, scale);
            let probs = tape.softmax_masked(scaled, mask.clone());
            head_outputs.push(tape.matmul(probs, vh));
        }
        let merged = tape.concat_cols(&head_outputs);
        let projected = linear(tape, merged, layer.wo, layer.bo);
        let after_attn = tape.add(x, projected);

        let g2 = tape.param(layer.ln2_gain);
        let b2 = tape.param(layer.ln2_bias);
        let normed2 = tape.layer_norm(after_attn, g2, b2);
        let ff1 = linear(tape, normed2, layer.w_ff1, layer.b_ff1);
        let act = tape.gelu(ff1);
        let ff2 = linear(tape, act, layer.w_ff2, layer.b_ff2);
        tape.add(after_attn, ff2)
    }
}

/// Two-layer MLP head: `d_in -> d_hidden -> d_out` with a GELU between.
#[derive(Debug, Clone)]
pub struct MlpParams {
    pub w1: ParamId,
    pub b1: ParamId,
    pub w2: ParamId,
    pub b2: ParamId,
}

impl MlpParams {
    pub fn create<R: Rng>(
        store: &mut ParamStore,
        rng: &mut R,
        prefix: &str,
        d_in: usize,
        d_hidden: usize,
        d_out: usize,
    ) -> Self {
        Self {
            w1: store.add_linear(rng, format!("{prefix}.w1"), d_in, d_hidden),
            b1: store.add_zeros(format!("{prefix}.b1"), 1, d_hidden),
            w2: store.add_linear(rng, format!("{prefix}.w2"), d_hidden, d_out),
            b2: store.add_zeros(format!("{prefix}.b2"), 1, d_out),
        }
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Var {
        let w1 = tape.param(self.w1);
        let b1 = tape.param(self.b1);
        let h = tape.matmul(x, w1);
        let h = tape.add_row(h, b1);
        let h = tape.gelu(h);
        let w2 = tape.param(self.w2);
        let b2 = tape.param(self.b2);
        let y = tape.matmul(h, w2);
        tape.add_row(y, b2)
    }
}

/// Single linear map.
#[derive(Debug, Clone)]
pub struct LinearParams {
    pub w: ParamId,
    pub b: ParamId,
}

impl LinearParams {
    pub fn create<R: Rng>(
        store: &mut ParamStore,
        rng: &mut R,
        prefix: &str,
        d_in: usize,
        d_out: usize,
    ) -> Self {
        Self {
            w: store.add_linear(rng, format!("{prefix}.w"), d_in, d_out),
            b: store.add_zeros(format!("{prefix}.b"), 1, d_out),
        }
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Var {
        let w = tape.param(self.w);
        let b = tape.param(self.b);
        let y = tape.matmul(x, w);
        tape.add_row(y, b)
    }
}

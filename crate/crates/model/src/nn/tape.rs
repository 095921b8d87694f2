//! Define-by-run reverse-mode autodiff over `f64` matrices.
//!
//! A [`Tape`] records every operation of one forward pass; [`Tape::backward`]
//! walks the record once and accumulates parameter gradients. Values are
//! plain `ndarray` matrices; a `(1 x n)` row stands in for a vector and a
//! `(1 x 1)` matrix for a scalar.
//!
//! Masked softmax is computed strictly over unmasked entries (masked
//! positions never enter the max or the normalizer), so a masked sender has
//! exactly zero influence on the receiver, which the attention-soundness
//! probes rely on.

use super::params::{GradStore, ParamId, ParamStore};
use ndarray::{s, Array2, Axis};
use std::sync::Arc;

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

const GELU_C1: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)
const GELU_C2: f64 = 0.044_715;
const LN_EPS: f64 = 1e-5;

enum Op {
    Param(ParamId),
    Const,
    Rows { src: Var, idx: Vec<usize> },
    Cols { src: Var, start: usize, len: usize },
    ConcatRows { parts: Vec<Var> },
    ConcatCols { parts: Vec<Var> },
    MatMul { a: Var, b: Var },
    MatMulNT { a: Var, b: Var },
    Add { a: Var, b: Var },
    AddRow { a: Var, b: Var },
    Sub { a: Var, b: Var },
    Mul { a: Var, b: Var },
    Scale { a: Var, c: f64 },
    Gelu { a: Var },
    Exp { a: Var },
    LayerNorm { x: Var, gain: Var, bias: Var },
    SoftmaxMasked { x: Var, mask: Arc<Array2<bool>> },
    MeanRows { x: Var },
    SumAll { x: Var },
    CeSum { logits: Var, targets: Vec<usize> },
    BceSum { logits: Var, targets: Array2<f64>, weights: Array2<f64> },
    SelectionCe { query: Var, feats: Var, target: usize },
    KlStdNormal { mean: Var, logvar: Var },
}

struct Node {
    value: Array2<f64>,
    op: Op,
}

/// One forward pass under construction.
pub struct Tape<'p> {
    params: &'p ParamStore,
    nodes: Vec<Node>,
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamStore) -> Self {
        Self { params, nodes: Vec::with_capacity(256) }
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        debug_assert_eq!(self.value(v).len(), 1);
        self.value(v)[[0, 0]]
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn param(&mut self, id: ParamId) -> Var {
        self.push(self.params.value(id).clone(), Op::Param(id))
    }

    pub fn constant(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Const)
    }

    pub fn zeros(&mut self, rows: usize, cols: usize) -> Var {
        self.constant(Array2::zeros((rows, cols)))
    }

    /// Gather rows of `src` in the given order (repeats allowed).
    pub fn rows(&mut self, src: Var, idx: &[usize]) -> Var {
        let v = self.value(src);
        let mut out = Array2::zeros((idx.len(), v.ncols()));
        for (r, &i) in idx.iter().enumerate() {
            out.row_mut(r).assign(&v.row(i));
        }
        self.push(out, Op::Rows { src, idx: idx.to_vec() })
    }

    pub fn cols(&mut self, src: Var, start: usize, len: usize) -> Var {
        let v = self.value(src).slice(s![.., start..start + len]).to_owned();
        self.push(v, Op::Cols { src, start, len })
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        let cols = self.value(parts[0]).ncols();
        let total: usize = parts.iter().map(|p| self.value(*p).nrows()).sum();
        let mut out = Array2::zeros((total, cols));
        let mut r = 0;
        for p in parts {
            let v = self.value(*p);
            out.slice_mut(s![r..r + v.nrows(), ..]).assign(v);
            r += v.nrows();
        }
        self.push(out, Op::ConcatRows { parts: parts.to_vec() })
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).nrows();
        let total: usize = parts.iter().map(|p| self.value(*p).ncols()).sum();
        let mut out = Array2::zeros((rows, total));
        let mut c = 0;
        for p in parts {
            let v = self.value(*p);
            out.slice_mut(s![.., c..c + v.ncols()]).assign(v);
            c += v.ncols();
        }
        self.push(out, Op::ConcatCols { parts: parts.to_vec() })
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(self.value(b));
        self.push(v, Op::MatMul { a, b })
    }

    /// `a . b^T` without materializing the transpose on the tape.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(&self.value(b).t());
        self.push(v, Op::MatMulNT { a, b })
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::Add { a, b })
    }

    /// Add a `(1 x n)` row to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + &self.value(b).row(0);
        self.push(v, Op::AddRow { a, b })
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) - self.value(b);
        self.push(v, Op::Sub { a, b })
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) * self.value(b);
        self.push(v, Op::Mul { a, b })
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let v = self.value(a) * c;
        self.push(v, Op::Scale { a, c })
    }

    pub fn gelu(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(|x| {
            let u = GELU_C1 * (x + GELU_C2 * x * x * x);
            0.5 * x * (1.0 + u.tanh())
        });
        self.push(v, Op::Gelu { a })
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let v = self.value(a).mapv(f64::exp);
        self.push(v, Op::Exp { a })
    }

    /// Row-wise layer normalization with learned gain and bias (`1 x n`).
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var) -> Var {
        let v = self.value(x);
        let g = self.value(gain).row(0).to_owned();
        let b = self.value(bias).row(0).to_owned();
        let mut out = Array2::zeros(v.raw_dim());
        for (r, row) in v.axis_iter(Axis(0)).enumerate() {
            let n = row.len() as f64;
            let mean = row.sum() / n;
            let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            let rstd = 1.0 / (var + LN_EPS).sqrt();
            for (c, x) in row.iter().enumerate() {
                out[[r, c]] = (x - mean) * rstd * g[c] + b[c];
            }
        }
        self.push(out, Op::LayerNorm { x, gain, bias })
    }

    /// Row-wise softmax over unmasked entries; masked entries are exactly 0
    /// in the output and receive exactly 0 gradient.
    pub fn softmax_masked(&mut self, x: Var, mask: Arc<Array2<bool>>) -> Var {
        let v = self.value(x);
        assert_eq!(v.raw_dim(), mask.raw_dim(), "mask shape mismatch");
        let mut out = Array2::zeros(v.raw_dim());
        for r in 0..v.nrows() {
            let mut max = f64::NEG_INFINITY;
            for c in 0..v.ncols() {
                if mask[[r, c]] && v[[r, c]] > max {
                    max = v[[r, c]];
                }
            }
            assert!(max.is_finite(), "softmax row {r} fully masked");
            let mut denom = 0.0;
            for c in 0..v.ncols() {
                if mask[[r, c]] {
                    let e = (v[[r, c]] - max).exp();
                    out[[r, c]] = e;
                    denom += e;
                }
            }
            for c in 0..v.ncols() {
                if mask[[r, c]] {
                    out[[r, c]] /= denom;
                }
            }
        }
        self.push(out, Op::SoftmaxMasked { x, mask })
    }

    /// `(1 x n)` mean of the rows.
    pub fn mean_rows(&mut self, x: Var) -> Var {
        let v = self.value(x);
        let mean = v.mean_axis(Axis(0)).expect("non-empty").insert_axis(Axis(0));
        self.push(mean, Op::MeanRows { x })
    }

    pub fn sum_all(&mut self, x: Var) -> Var {
        let v = Array2::from_elem((1, 1), self.value(x).sum());
        self.push(v, Op::SumAll { x })
    }

    /// Sum of per-row softmax cross-entropies against integer targets.
    pub fn ce_sum(&mut self, logits: Var, targets: &[usize]) -> Var {
        let v = self.value(logits);
        assert_eq!(v.nrows(), targets.len());
        let mut total = 0.0;
        for (r, &t) in targets.iter().enumerate() {
            let row = v.row(r);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
            total += lse - row[t];
        }
        self.push(
            Array2::from_elem((1, 1), total),
            Op::CeSum { logits, targets: targets.to_vec() },
        )
    }

    /// Weighted sum of element-wise binary cross-entropies on logits.
    pub fn bce_sum(&mut self, logits: Var, targets: Array2<f64>, weights: Array2<f64>) -> Var {
        let v = self.value(logits);
        assert_eq!(v.raw_dim(), targets.raw_dim());
        assert_eq!(v.raw_dim(), weights.raw_dim());
        let mut total = 0.0;
        for ((x, t), w) in v.iter().zip(targets.iter()).zip(weights.iter()) {
            // stable softplus(x) - t*x
            let sp = if *x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
            total += w * (sp - t * x);
        }
        self.push(Array2::from_elem((1, 1), total), Op::BceSum { logits, targets, weights })
    }

    /// Cross-entropy of the distance-softmax selection: candidates are the
    /// rows of `feats`, logits are negative squared Euclidean distances from
    /// `query` (a single row), scaled by `1 / width` so the softmax
    /// temperature is independent of the feature width.
    pub fn selection_ce(&mut self, query: Var, feats: Var, target: usize) -> Var {
        let probs = self.selection_probs_value(query, feats);
        let loss = -probs[target].max(1e-300).ln();
        self.push(Array2::from_elem((1, 1), loss), Op::SelectionCe { query, feats, target })
    }

    /// Inference helper: the selection distribution as plain values.
    pub fn selection_probs_value(&self, query: Var, feats: Var) -> Vec<f64> {
        let q = self.value(query).row(0).to_owned();
        let f = self.value(feats);
        let inv_d = 1.0 / q.len() as f64;
        let scores: Vec<f64> = (0..f.nrows())
            .map(|i| {
                -inv_d
                    * f.row(i).iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            })
            .collect();
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let denom: f64 = exps.iter().sum();
        exps.iter().map(|e| e / denom).collect()
    }

    /// `0.5 * sum(mu^2 + e^logvar - logvar - 1)` for a diagonal Gaussian
    /// against the standard normal.
    pub fn kl_std_normal(&mut self, mean: Var, logvar: Var) -> Var {
        let m = self.value(mean);
        let lv = self.value(logvar);
        let kl = 0.5
            * m.iter()
                .zip(lv.iter())
                .map(|(mu, l)| mu * mu + l.exp() - l - 1.0)
                .sum::<f64>();
        self.push(Array2::from_elem((1, 1), kl), Op::KlStdNormal { mean, logvar })
    }

    /// Reverse pass from a scalar loss; gradients land in `grads`.
    pub fn backward(&self, loss: Var, grads: &mut GradStore) {
        let mut adjoint: Vec<Option<Array2<f64>>> = vec![None; self.nodes.len()];
        adjoint[loss.0] = Some(Array2::ones((1, 1)));

        for i in (0..=loss.0).rev() {
            let Some(g) = adjoint[i].take() else { continue };
            match &self.nodes[i].op {
                Op::Const => {}
                Op::Param(id) => grads.accumulate(*id, &g),
                Op::Rows { src, idx } => {
                    let mut gs = self.grad_slot(&mut adjoint, *src);
                    for (r, &srow) in idx.iter().enumerate() {
                        let mut target = gs.row_mut(srow);
                        target += &g.row(r);
                    }
                    adjoint[src.0] = Some(gs);
                }
                Op::Cols { src, start, len } => {
                    let mut gs = self.grad_slot(&mut adjoint, *src);
                    let mut sl = gs.slice_mut(s![.., *start..start + len]);
                    sl += &g;
                    adjoint[src.0] = Some(gs);
                }
                Op::ConcatRows { parts } => {
                    let mut r = 0;
                    for p in parts {
                        let n = self.nodes[p.0].value.nrows();
                        let mut gp = self.grad_slot(&mut adjoint, *p);
                        gp += &g.slice(s![r..r + n, ..]);
                        adjoint[p.0] = Some(gp);
                        r += n;
                    }
                }
                Op::ConcatCols { parts } => {
                    let mut c = 0;
                    for p in parts {
                        let n = self.nodes[p.0].value.ncols();
                        let mut gp = self.grad_slot(&mut adjoint, *p);
                        gp += &g.slice(s![.., c..c + n]);
                        adjoint[p.0] = Some(gp);
                        c += n;
                    }
                }
                Op::MatMul { a, b } => {
                    let ga = g.dot(&self.nodes[b.0].value.t());
                    let gb = self.nodes[a.0].value.t().dot(&g);
                    self.bump(&mut adjoint, *a, ga);
                    self.bump(&mut adjoint, *b, gb);
                }
                Op::MatMulNT { a, b } => {
                    let ga = g.dot(&self.nodes[b.0].value);
                    let gb = g.t().dot(&self.nodes[a.0].value);
                    self.bump(&mut adjoint, *a, ga);
                    self.bump(&mut adjoint, *b, gb);
                }
                Op::Add { a, b } => {
                    self.bump(&mut adjoint, *a, g.clone());
                    self.bump(&mut adjoint, *b, g);
                }
                Op::AddRow { a, b } => {
                    let gb = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    self.bump(&mut adjoint, *a, g);
                    self.bump(&mut adjoint, *b, gb);
                }
                Op::Sub { a, b } => {
                    self.bump(&mut adjoint, *a, g.clone());
                    self.bump(&mut adjoint, *b, -g);
                }
                Op::Mul { a, b } => {
                    let ga = &g * &self.nodes[b.0].value;
                    let gb = &g * &self.nodes[a.0].value;
                    self.bump(&mut adjoint, *a, ga);
                    self.bump(&mut adjoint, *b, gb);
                }
                Op::Scale { a, c } => self.bump(&mut adjoint, *a, &g * *c),
                Op::Gelu { a } => {
                    let x = &self.nodes[a.0].value;
                    let mut ga = g.clone();
                    ga.zip_mut_with(x, |gv, &xv| {
                        let u = GELU_C1 * (xv + GELU_C2 * xv * xv * xv);
                        let t = u.tanh();
                        let du = GELU_C1 * (1.0 + 3.0 * GELU_C2 * xv * xv);
                        *gv *= 0.5 * (1.0 + t) + 0.5 * xv * (1.0 - t * t) * du;
                    });
                    self.bump(&mut adjoint, *a, ga);
                }
                Op::Exp { a } => {
                    let ga = &g * &self.nodes[i].value;
                    self.bump(&mut adjoint, *a, ga);
                }
                Op::LayerNorm { x, gain, bias } => {
                    let xv = &self.nodes[x.0].value;
                    let gv = self.nodes[gain.0].value.row(0).to_owned();
                    let n = xv.ncols() as f64;
                    let mut gx = Array2::zeros(xv.raw_dim());
                    let mut ggain = Array2::zeros((1, xv.ncols()));
                    let mut gbias = Array2::zeros((1, xv.ncols()));
                    for r in 0..xv.nrows() {
                        let row = xv.row(r);
                        let mean = row.sum() / n;
                        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                        let rstd = 1.0 / (var + LN_EPS).sqrt();
                        // dxhat and the two reductions
                        let mut sum_dxhat = 0.0;
                        let mut sum_dxhat_xhat = 0.0;
                        let mut dxhat = vec![0.0; xv.ncols()];
                        for c in 0..xv.ncols() {
                            let xhat = (xv[[r, c]] - mean) * rstd;
                            let d = g[[r, c]] * gv[c];
                            dxhat[c] = d;
                            sum_dxhat += d;
                            sum_dxhat_xhat += d * xhat;
                            ggain[[0, c]] += g[[r, c]] * xhat;
                            gbias[[0, c]] += g[[r, c]];
                        }
                        for c in 0..xv.ncols() {
                            let xhat = (xv[[r, c]] - mean) * rstd;
                            gx[[r, c]] = rstd * (dxhat[c] - sum_dxhat / n - xhat * sum_dxhat_xhat / n);
                        }
                    }
                    self.bump(&mut adjoint, *x, gx);
                    self.bump(&mut adjoint, *gain, ggain);
                    self.bump(&mut adjoint, *bias, gbias);
                }
                Op::SoftmaxMasked { x, mask } => {
                    let p = &self.nodes[i].value;
                    let mut gx = Array2::zeros(p.raw_dim());
                    for r in 0..p.nrows() {
                        let mut dot = 0.0;
                        for c in 0..p.ncols() {
                            if mask[[r, c]] {
                                dot += g[[r, c]] * p[[r, c]];
                            }
                        }
                        for c in 0..p.ncols() {
                            if mask[[r, c]] {
                                gx[[r, c]] = p[[r, c]] * (g[[r, c]] - dot);
                            }
                        }
                    }
                    self.bump(&mut adjoint, *x, gx);
                }
                Op::MeanRows { x } => {
                    let n = self.nodes[x.0].value.nrows();
                    let mut gx = Array2::zeros(self.nodes[x.0].value.raw_dim());
                    let row = &g.row(0) / n as f64;
                    for r in 0..n {
                        gx.row_mut(r).assign(&row);
                    }
                    self.bump(&mut adjoint, *x, gx);
                }
                Op::SumAll { x } => {
                    let gx = Array2::from_elem(self.nodes[x.0].value.raw_dim(), g[[0, 0]]);
                    self.bump(&mut adjoint, *x, gx);
                }
                Op::CeSum { logits, targets } => {
                    let v = &self.nodes[logits.0].value;
                    let mut gx = Array2::zeros(v.raw_dim());
                    for (r, &t) in targets.iter().enumerate() {
                        let row = v.row(r);
                        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        let denom: f64 = row.iter().map(|x| (x - max).exp()).sum();
                        for c in 0..v.ncols() {
                            let p = (v[[r, c]] - max).exp() / denom;
                            gx[[r, c]] = g[[0, 0]] * (p - if c == t { 1.0 } else { 0.0 });
                        }
                    }
                    self.bump(&mut adjoint, *logits, gx);
                }
                Op::BceSum { logits, targets, weights } => {
                    let v = &self.nodes[logits.0].value;
                    let mut gx = Array2::zeros(v.raw_dim());
                    for ((idx, x), (t, w)) in
                        v.indexed_iter().zip(targets.iter().zip(weights.iter()))
                    {
                        let sig = 1.0 / (1.0 + (-x).exp());
                        gx[idx] = g[[0, 0]] * w * (sig - t);
                    }
                    self.bump(&mut adjoint, *logits, gx);
                }
                Op::SelectionCe { query, feats, target } => {
                    let probs = self.selection_probs_value(*query, *feats);
                    let q = self.nodes[query.0].value.row(0).to_owned();
                    let f = &self.nodes[feats.0].value;
                    let inv_d = 1.0 / q.len() as f64;
                    let mut gq = Array2::zeros((1, q.len()));
                    let mut gf = Array2::zeros(f.raw_dim());
                    for (c, p) in probs.iter().enumerate() {
                        let coeff = g[[0, 0]] * (p - if c == *target { 1.0 } else { 0.0 });
                        for d in 0..q.len() {
                            let diff = q[d] - f[[c, d]];
                            // logit_c = -|q - f_c|^2 / width
                            gq[[0, d]] += coeff * (-2.0 * inv_d * diff);
                            gf[[c, d]] += coeff * (2.0 * inv_d * diff);
                        }
                    }
                    self.bump(&mut adjoint, *query, gq);
                    self.bump(&mut adjoint, *feats, gf);
                }
                Op::KlStdNormal { mean, logvar } => {
                    let m = &self.nodes[mean.0].value;
                    let lv = &self.nodes[logvar.0].value;
                    let gm = m * g[[0, 0]];
                    let glv = lv.mapv(|l| 0.5 * (l.exp() - 1.0) * g[[0, 0]]);
                    self.bump(&mut adjoint, *mean, gm);
                    self.bump(&mut adjoint, *logvar, glv);
                }
            }
        }
    }

    fn grad_slot(&self, adjoint: &mut [Option<Array2<f64>>], v: Var) -> Array2<f64> {
        adjoint[v.0]
            .take()
            .unwrap_or_else(|| Array2::zeros(self.nodes[v.0].value.raw_dim()))
    }

    fn bump(&self, adjoint: &mut [Option<Array2<f64>>], v: Var, g: Array2<f64>) {
        match &mut adjoint[v.0] {
            Some(acc) => *acc += &g,
            slot => *slot = Some(g),
        }
    }
}

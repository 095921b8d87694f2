use crate::targets::{RoundTarget, SampleTargets};
use layout_model::nn::{Tape, Var};
use layout_model::{attr_logits, context_codes, encode_structure_on_tape, generator_pass};
use layout_model::{EmbedRow, Model, ModelError, PassIndex, RoundTokens};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Per-batch loss components. Every component is the mean over its supervised
/// positions; `total` is their weighted sum (all head weights 1, the KL term
/// weighted by the effective beta).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub ce_x: f64,
    pub ce_y: f64,
    pub ce_w: f64,
    pub ce_h: f64,
    pub ce_t: f64,
    pub bce_b1: f64,
    pub bce_b2: f64,
    pub bce_b3: f64,
    pub bce_b4: f64,
    pub ce_select: f64,
    pub kl: f64,
    /// Effective KL weight at this step (after warm-up).
    pub beta: f64,
    pub total: f64,
}

impl LossReport {
    pub fn is_finite(&self) -> bool {
        [
            self.ce_x, self.ce_y, self.ce_w, self.ce_h, self.ce_t, self.bce_b1, self.bce_b2,
            self.bce_b3, self.bce_b4, self.ce_select, self.kl, self.total,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    fn sum_components(&self, beta: f64) -> f64 {
        self.ce_x
            + self.ce_y
            + self.ce_w
            + self.ce_h
            + self.ce_t
            + self.bce_b1
            + self.bce_b2
            + self.bce_b3
            + self.bce_b4
            + self.ce_select
            + beta * self.kl
    }
}

/// Raw per-sample sums and counts, accumulated into a batch report.
#[derive(Debug, Clone, Copy, Default)]
pub struct LossSums {
    pub attr: [f64; 5],
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub select: f64,
    pub kl: f64,
    pub n_rounds: usize,
    pub n_nodes: usize,
    pub n_select: usize,
    pub n_samples: usize,
}

impl LossSums {
    pub fn merge(&mut self, other: &LossSums) {
        for a in 0..5 {
            self.attr[a] += other.attr[a];
        }
        self.b1 += other.b1;
        self.b2 += other.b2;
        self.b3 += other.b3;
        self.b4 += other.b4;
        self.select += other.select;
        self.kl += other.kl;
        self.n_rounds += other.n_rounds;
        self.n_nodes += other.n_nodes;
        self.n_select += other.n_select;
        self.n_samples += other.n_samples;
    }

    pub fn report(&self, beta: f64) -> LossReport {
        let per = |sum: f64, n: usize| if n == 0 { 0.0 } else { sum / n as f64 };
        let r = LossReport {
            ce_x: per(self.attr[0], self.n_nodes),
            ce_y: per(self.attr[1], self.n_nodes),
            ce_w: per(self.attr[2], self.n_nodes),
            ce_h: per(self.attr[3], self.n_nodes),
            ce_t: per(self.attr[4], self.n_nodes),
            bce_b1: per(self.b1, self.n_nodes),
            bce_b2: per(self.b2, self.n_nodes),
            bce_b3: per(self.b3, self.n_rounds),
            bce_b4: per(self.b4, self.n_rounds),
            ce_select: per(self.select, self.n_select),
            kl: per(self.kl, self.n_samples),
            beta,
            total: 0.0,
        };
        LossReport { total: r.sum_components(beta), ..r }
    }
}

/// Normalization factors turning per-sample sums into the batch objective:
/// the optimized objective equals the report's `total`, so every term is
/// scaled by one over its batch-wide count.
#[derive(Debug, Clone, Copy)]
pub struct LossScale {
    pub inv_nodes: f64,
    pub inv_rounds: f64,
    pub inv_select: f64,
    pub inv_samples: f64,
    pub beta: f64,
}

impl LossScale {
    pub fn from_counts(sums: &LossSums, beta: f64) -> Self {
        let inv = |n: usize| if n == 0 { 0.0 } else { 1.0 / n as f64 };
        Self {
            inv_nodes: inv(sums.n_nodes),
            inv_rounds: inv(sums.n_rounds),
            inv_select: inv(sums.n_select),
            inv_samples: inv(sums.n_samples),
            beta,
        }
    }
}

/// Count the supervision positions of a sample without running the model;
/// used to fix the batch normalization before building gradients.
pub fn count_positions(targets: &SampleTargets) -> LossSums {
    let mut sums = LossSums { n_samples: 1, ..Default::default() };
    sums.n_rounds = targets.rounds.len();
    for t in &targets.rounds {
        if let RoundTarget::Node { selection, .. } = t {
            sums.n_nodes += 1;
            if selection.is_some() {
                sums.n_select += 1;
            }
        }
    }
    sums
}

/// Teacher-forced features of one sample.
///
/// The generator runs twice: one pass carrying every round's context token
/// (all substep-1 features at once), then one pass carrying the node rounds'
/// full `[e, p1, p2, p3]` blocks. Masks keep rounds mutually invisible and
/// prefix positions independent of appended tokens, so the two passes equal
/// running all substeps sequentially.
pub struct SampleForward {
    /// Substep-1 features, one row per round.
    pub r1: Var,
    /// Substep-3 / substep-4 features, one row per node round.
    pub r3: Option<Var>,
    pub r4: Option<Var>,
    /// Full second-pass features and its index (for selection losses).
    pub f2: Option<(Var, PassIndex)>,
    pub kl: Var,
    /// Round indices that carry nodes.
    pub node_round_of: Vec<usize>,
}

pub fn sample_forward(
    model: &Model,
    tape: &mut Tape,
    targets: &SampleTargets,
    eps: &[f64],
) -> Result<SampleForward, ModelError> {
    let n_conds = targets.cond.attributes.len();
    let orgs = &targets.cond.organizations;
    let n_rounds = targets.rounds.len();
    if n_rounds > model.config.max_seq {
        return Err(ModelError::Capacity { len: n_rounds, max: model.config.max_seq });
    }

    let (z, mean, logvar) =
        encode_structure_on_tape(model, tape, &targets.structure_seq, Some(eps))?;
    let kl = tape.kl_std_normal(mean, logvar);
    let z_token = model.z_proj.forward(tape, z);

    let item_embeds = if targets.seq.is_empty() {
        None
    } else {
        Some(model.embedder.embed_items(tape, &targets.seq.items)?)
    };
    let e_codes = context_codes(model, tape, item_embeds, &targets.contexts)?;

    let cond_tokens = if n_conds > 0 {
        let rows: Vec<EmbedRow> = targets.cond.attributes.iter().map(EmbedRow::from).collect();
        Some(model.embedder.embed_rows(tape, &rows)?)
    } else {
        None
    };

    let pass1_rounds: Vec<RoundTokens> = (0..n_rounds)
        .map(|r| RoundTokens {
            e: e_codes[r],
            appended: vec![],
            satisfied: targets.satisfied_before[r].clone(),
        })
        .collect();
    let (f1, idx1) = generator_pass(model, tape, cond_tokens, orgs, z_token, &pass1_rounds)?;
    let r1_positions: Vec<usize> = (0..n_rounds).map(|r| idx1.e_of(r)).collect();
    let r1 = tape.rows(f1, &r1_positions);

    let node_rounds: Vec<(usize, Option<usize>)> =
        targets.node_rounds().map(|(r, _, sel)| (r, sel)).collect();
    if node_rounds.is_empty() {
        return Ok(SampleForward { r1, r3: None, r4: None, f2: None, kl, node_round_of: vec![] });
    }

    let p1_all = model.heads.p1.forward(tape, r1);
    let p3_rows: Vec<EmbedRow> = targets
        .node_rounds()
        .map(|(_, n, _)| EmbedRow::from_attrs(n.attrs()))
        .collect();
    let p3_all = model.embedder.embed_rows(tape, &p3_rows)?;

    let pass2_rounds: Vec<RoundTokens> = node_rounds
        .iter()
        .enumerate()
        .map(|(i, (r, selection))| {
            let p1 = tape.rows(p1_all, &[*r]);
            let p2 = match selection {
                Some(c) => {
                    let ct = cond_tokens.expect("selection implies conditions");
                    tape.rows(ct, &[*c])
                }
                None => tape.zeros(1, model.config.d_model),
            };
            let p3 = tape.rows(p3_all, &[i]);
            RoundTokens {
                e: e_codes[*r],
                appended: vec![p1, p2, p3],
                satisfied: targets.satisfied_before[*r].clone(),
            }
        })
        .collect();
    let (f2, idx2) = generator_pass(model, tape, cond_tokens, orgs, z_token, &pass2_rounds)?;
    let r3_positions: Vec<usize> = (0..node_rounds.len()).map(|i| idx2.appended_of(i, 1)).collect();
    let r4_positions: Vec<usize> = (0..node_rounds.len()).map(|i| idx2.appended_of(i, 2)).collect();
    let r3 = tape.rows(f2, &r3_positions);
    let r4 = tape.rows(f2, &r4_positions);
    Ok(SampleForward {
        r1,
        r3: Some(r3),
        r4: Some(r4),
        f2: Some((f2, idx2)),
        kl,
        node_round_of: node_rounds.iter().map(|(r, _)| *r).collect(),
    })
}

/// The full loss graph for one teacher-forced sample: the scaled batch
/// contribution plus raw component sums for reporting.
pub struct SampleLoss {
    pub weighted_total: Var,
    pub sums: LossSums,
}

pub fn sample_loss(
    model: &Model,
    tape: &mut Tape,
    targets: &SampleTargets,
    scale: &LossScale,
    eps: &[f64],
) -> Result<SampleLoss, ModelError> {
    let fwd = sample_forward(model, tape, targets, eps)?;
    let n_rounds = targets.rounds.len();
    let n_conds = targets.cond.attributes.len();
    let mut sums = count_positions(targets);

    // substep-1 binaries over every round
    let b34 = model.heads.b34.forward(tape, fwd.r1);
    let mut b34_targets = Array2::zeros((n_rounds, 2));
    for (r, t) in targets.rounds.iter().enumerate() {
        match t {
            RoundTarget::LevelSep => b34_targets[[r, 0]] = 1.0,
            RoundTarget::Node { selection, .. } => {
                b34_targets[[r, 1]] = selection.is_some() as u8 as f64;
            }
        }
    }
    let col = |c: usize| Array2::from_shape_fn((n_rounds, 2), |(_, k)| (k == c) as u8 as f64);
    let b3_raw = tape.bce_sum(b34, b34_targets.clone(), col(0));
    let b4_raw = tape.bce_sum(b34, b34_targets.clone(), col(1));
    let mut weighted_total =
        tape.bce_sum(b34, b34_targets, Array2::from_elem((n_rounds, 2), scale.inv_rounds));
    sums.b3 = tape.scalar(b3_raw);
    sums.b4 = tape.scalar(b4_raw);

    if let (Some(r3), Some(r4), Some((f2, idx2))) = (fwd.r3, fwd.r4, &fwd.f2) {
        let node_rounds: Vec<(usize, &layout_seq::SeqNode, Option<usize>)> =
            targets.node_rounds().collect();

        let logits = attr_logits(model, tape, r3);
        let mut attr_targets: [Vec<usize>; 5] = Default::default();
        for (_, node, _) in &node_rounds {
            let a = node.attrs();
            for k in 0..5 {
                attr_targets[k].push(a[k] as usize);
            }
        }
        for k in 0..5 {
            let raw = tape.ce_sum(logits[k], &attr_targets[k]);
            sums.attr[k] = tape.scalar(raw);
            let weighted = tape.scale(raw, scale.inv_nodes);
            weighted_total = tape.add(weighted_total, weighted);
        }

        let b12 = model.heads.b12.forward(tape, r4);
        let n_nodes = node_rounds.len();
        let mut b12_targets = Array2::zeros((n_nodes, 2));
        for (i, (_, node, _)) in node_rounds.iter().enumerate() {
            b12_targets[[i, 0]] = node.leaf as u8 as f64;
            b12_targets[[i, 1]] = node.last_child as u8 as f64;
        }
        let col2 = |c: usize| Array2::from_shape_fn((n_nodes, 2), |(_, k)| (k == c) as u8 as f64);
        let b1_raw = tape.bce_sum(b12, b12_targets.clone(), col2(0));
        let b2_raw = tape.bce_sum(b12, b12_targets.clone(), col2(1));
        let b12_weighted =
            tape.bce_sum(b12, b12_targets, Array2::from_elem((n_nodes, 2), scale.inv_nodes));
        weighted_total = tape.add(weighted_total, b12_weighted);
        sums.b1 = tape.scalar(b1_raw);
        sums.b2 = tape.scalar(b2_raw);

        // selection over the conditions unsatisfied at each supervised round
        let mut select_raw = 0.0;
        for (i, (r, _, selection)) in node_rounds.iter().enumerate() {
            let Some(target_cond) = selection else { continue };
            let sat = &targets.satisfied_before[*r];
            let mut candidate_rows: Vec<usize> = Vec::new();
            let mut target_idx = None;
            for c in 0..n_conds {
                if !sat.attr[c] {
                    if c == *target_cond {
                        target_idx = Some(candidate_rows.len());
                    }
                    candidate_rows.push(idx2.cond(c));
                }
            }
            for (j, org_sat) in sat.org.iter().enumerate() {
                if !org_sat {
                    candidate_rows.push(idx2.org(j));
                }
            }
            let target_idx = target_idx.expect("teacher-forcing target must be unsatisfied");
            let feats = tape.rows(*f2, &candidate_rows);
            let query = tape.rows(*f2, &[idx2.appended_of(i, 0)]);
            let raw = tape.selection_ce(query, feats, target_idx);
            select_raw += tape.scalar(raw);
            let weighted = tape.scale(raw, scale.inv_select);
            weighted_total = tape.add(weighted_total, weighted);
        }
        sums.select = select_raw;
    }

    sums.kl = tape.scalar(fwd.kl);
    let kl_weighted = tape.scale(fwd.kl, scale.beta * scale.inv_samples);
    weighted_total = tape.add(weighted_total, kl_weighted);

    Ok(SampleLoss { weighted_total, sums })
}

/// Teacher-forced attribute accuracy of one sample: per attribute head, the
/// argmax against the ground-truth bin, counted over nodes and heads.
pub fn sample_attr_accuracy(
    model: &Model,
    targets: &SampleTargets,
    eps: &[f64],
) -> Result<(usize, usize), ModelError> {
    let mut tape = Tape::new(&model.params);
    let fwd = sample_forward(model, &mut tape, targets, eps)?;
    let Some(r3) = fwd.r3 else {
        return Ok((0, 0));
    };
    let logits = attr_logits(model, &mut tape, r3);
    let mut correct = 0usize;
    let mut total = 0usize;
    for (i, (_, node, _)) in targets.node_rounds().enumerate() {
        let truth = node.attrs();
        for k in 0..5 {
            let row = tape.value(logits[k]).row(i).to_owned();
            let mut best = 0;
            for (j, v) in row.iter().enumerate() {
                if *v > row[best] {
                    best = j;
                }
            }
            if best == truth[k] as usize {
                correct += 1;
            }
            total += 1;
        }
    }
    Ok((correct, total))
}

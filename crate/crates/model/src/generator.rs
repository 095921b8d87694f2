use crate::masks::{generator_mask, RoundBlock, RoundSatisfied};
use crate::nn::{Tape, Var};
use crate::{Model, ModelError};
use std::sync::Arc;

/// Tokens of one decoding round inside a generator pass.
#[derive(Debug, Clone)]
pub struct RoundTokens {
    /// The context-code token `e_k`.
    pub e: Var,
    /// Appended substep tokens, in order (`p1`, `p2`, `p3` as far as built).
    pub appended: Vec<Var>,
    /// Which conditions count as satisfied for this round.
    pub satisfied: RoundSatisfied,
}

/// Where everything landed in the assembled pass.
#[derive(Debug, Clone)]
pub struct PassIndex {
    pub n_conds: usize,
    pub n_orgs: usize,
    pub eoc: usize,
    pub z: usize,
    /// Start of each round block (the `e` token; appended tokens follow).
    pub round_start: Vec<usize>,
}

impl PassIndex {
    pub fn cond(&self, i: usize) -> usize {
        debug_assert!(i < self.n_conds);
        i
    }

    pub fn org(&self, j: usize) -> usize {
        debug_assert!(j < self.n_orgs);
        self.n_conds + j
    }

    pub fn e_of(&self, round: usize) -> usize {
        self.round_start[round]
    }

    pub fn appended_of(&self, round: usize, k: usize) -> usize {
        self.round_start[round] + 1 + k
    }
}

/// Assemble and run one generator pass over the condition block plus any
/// number of round blocks, under the full attention-mask rule set.
///
/// Positions are assigned by token role (condition index, organization
/// index, end marker, structure code, then context/p1/p2/p3), so a round
/// sees identical positional embeddings whether it is decoded alone or
/// batched with teacher forcing.
pub fn generator_pass(
    model: &Model,
    tape: &mut Tape,
    cond_tokens: Option<Var>,
    orgs: &[Vec<usize>],
    z_token: Var,
    rounds: &[RoundTokens],
) -> Result<(Var, PassIndex), ModelError> {
    let n = cond_tokens.map_or(0, |v| tape.value(v).nrows());
    let m = orgs.len();
    let pos_rows = model.config.max_seq + 8;
    if n + m + 6 > pos_rows {
        return Err(ModelError::Capacity { len: n + m, max: model.config.max_seq });
    }

    let mut parts: Vec<Var> = Vec::new();
    let mut positions: Vec<usize> = Vec::new();
    if let Some(ct) = cond_tokens {
        parts.push(ct);
        positions.extend(0..n);
    }
    if m > 0 {
        parts.push(model.embedder.special(tape, model.embedder.oc, m));
        positions.extend(n..n + m);
    }
    parts.push(model.embedder.special(tape, model.embedder.eoc, 1));
    positions.push(n + m);
    parts.push(z_token);
    positions.push(n + m + 1);

    let mut round_start = Vec::with_capacity(rounds.len());
    let mut blocks = Vec::with_capacity(rounds.len());
    let mut cursor = n + m + 2;
    for round in rounds {
        round_start.push(cursor);
        parts.push(round.e);
        positions.push(n + m + 2);
        for (k, extra) in round.appended.iter().enumerate() {
            parts.push(*extra);
            positions.push(n + m + 3 + k);
        }
        cursor += 1 + round.appended.len();
        blocks.push(RoundBlock { satisfied: round.satisfied.clone(), appended: round.appended.len() });
    }

    let input = tape.concat_rows(&parts);
    let pos_table = tape.param(model.generator.positional);
    let pos = tape.rows(pos_table, &positions);
    let input = tape.add(input, pos);

    let mask = Arc::new(generator_mask(n, orgs, &blocks));
    let features = model.generator.stack.forward(tape, input, &mask);
    let index = PassIndex { n_conds: n, n_orgs: m, eoc: n + m, z: n + m + 1, round_start };
    Ok((features, index))
}

/// The single-round form used at inference: one context token plus up to
/// three appended substep tokens; returns output features at every position.
pub fn generator_forward(
    model: &Model,
    tape: &mut Tape,
    cond_tokens: Option<Var>,
    orgs: &[Vec<usize>],
    satisfied: RoundSatisfied,
    z_token: Var,
    e_token: Var,
    appended: Vec<Var>,
) -> Result<(Var, PassIndex), ModelError> {
    assert!(appended.len() <= 3, "at most p1, p2, p3 are appended");
    generator_pass(
        model,
        tape,
        cond_tokens,
        orgs,
        z_token,
        &[RoundTokens { e: e_token, appended, satisfied }],
    )
}

/// Attribute logits (x, y, w, h, t) for the given substep-3 features.
pub fn attr_logits(model: &Model, tape: &mut Tape, r3: Var) -> [Var; 5] {
    [
        model.heads.attr_x.forward(tape, r3),
        model.heads.attr_y.forward(tape, r3),
        model.heads.attr_w.forward(tape, r3),
        model.heads.attr_h.forward(tape, r3),
        model.heads.attr_t.forward(tape, r3),
    ]
}

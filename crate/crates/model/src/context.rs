use crate::masks::causal_mask;
use crate::nn::{Tape, Var};
use crate::{Model, ModelError};
use std::sync::Arc;

/// What one decoding round needs from the context encoder: how much of the
/// emitted sequence precedes it, and which emitted items are the pending
/// parent and the most recent sibling of the node about to be generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundContext {
    pub prefix_len: usize,
    pub parent_item: Option<usize>,
    pub sibling_item: Option<usize>,
}

/// Context codes `e_k = f_parent + f_sibling + f_global` for a batch of
/// rounds over one emitted sequence.
///
/// `item_embeds` must hold the embedded emitted items (`L x d`). The global
/// feature is the mean of a causal Transformer's outputs over the prefix, so
/// one pass serves every round; the local features are FC maps of the parent
/// and sibling item embeddings. Ablation switches zero the respective parts.
pub fn context_codes(
    model: &Model,
    tape: &mut Tape,
    item_embeds: Option<Var>,
    rounds: &[RoundContext],
) -> Result<Vec<Var>, ModelError> {
    let d = model.config.d_model;
    let total_len = item_embeds.map_or(0, |v| tape.value(v).nrows());
    if total_len > model.config.max_seq {
        return Err(ModelError::Capacity { len: total_len, max: model.config.max_seq });
    }

    let global = if model.config.use_global_context && total_len > 0 {
        let embeds = item_embeds.expect("non-empty prefix");
        let pos = tape.param(model.context.positional);
        let pos_rows: Vec<usize> = (0..total_len).collect();
        let pos_slice = tape.rows(pos, &pos_rows);
        let input = tape.add(embeds, pos_slice);
        let mask = Arc::new(causal_mask(total_len));
        Some(model.context.stack.forward(tape, input, &mask))
    } else {
        None
    };

    let mut out = Vec::with_capacity(rounds.len());
    for round in rounds {
        let f_g = match (&global, round.prefix_len) {
            (Some(h), n) if n > 0 => {
                let prefix_rows: Vec<usize> = (0..n).collect();
                let prefix = tape.rows(*h, &prefix_rows);
                tape.mean_rows(prefix)
            }
            _ => tape.zeros(1, d),
        };
        let (f_p, f_s) = if model.config.use_local_context {
            let f_p = match round.parent_item {
                Some(i) => {
                    let embeds = item_embeds.expect("parent implies non-empty prefix");
                    let row = tape.rows(embeds, &[i]);
                    model.context.fc_parent.forward(tape, row)
                }
                None => tape.zeros(1, d),
            };
            let f_s = match round.sibling_item {
                Some(i) => {
                    let embeds = item_embeds.expect("sibling implies non-empty prefix");
                    let row = tape.rows(embeds, &[i]);
                    model.context.fc_sibling.forward(tape, row)
                }
                None => tape.zeros(1, d),
            };
            (f_p, f_s)
        } else {
            (tape.zeros(1, d), tape.zeros(1, d))
        };
        let local = tape.add(f_p, f_s);
        out.push(tape.add(local, f_g));
    }
    Ok(out)
}

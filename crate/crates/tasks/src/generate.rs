use crate::repair::{repair_sequence, RepairEntry};
use crate::TaskError;
use layout_core::{ConditionSet, LayoutTree};
use layout_model::nn::Tape;
use layout_model::{
    attr_logits, context_codes, generator_forward, sample_binary, sample_categorical,
    sample_from_probs, DecodeOptions, EmbedRow, GenerationState, Model, StructureCode,
};
use layout_seq::{deserialize, position_paths, SeqItem, SeqNode, TokenSequence};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Per-condition outcome of a generation run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CondReport {
    pub satisfied: bool,
    /// Path of the matched node in the final (repaired) tree.
    pub node_path: Option<Vec<usize>>,
}

/// The output of one generation session.
#[derive(Debug, Clone)]
pub struct GenerationResult {
    /// The emitted sequence after repair (always valid).
    pub sequence: TokenSequence,
    /// The raw emitted sequence, including the terminating separator.
    pub raw_sequence: TokenSequence,
    pub tree: LayoutTree,
    pub satisfaction: Vec<CondReport>,
    pub z: Vec<f64>,
    pub repair_log: Vec<RepairEntry>,
    /// True when decoding hit the length cap with work pending.
    pub truncated: bool,
}

impl GenerationResult {
    pub fn satisfied_count(&self) -> usize {
        self.satisfaction.iter().filter(|c| c.satisfied).count()
    }
}

/// Autoregressive generation under a condition set and a structure code.
///
/// Each round encodes the emitted prefix into a context code, then runs the
/// generator substeps: separator/condition binaries, condition selection,
/// attribute heads, and the two structural flags. Decoding is constrained to
/// structurally valid moves: a separator is emitted exactly when every group
/// of the current level is closed, the root carries the last-child flag, a
/// leaf-kind type forces the leaf flag, and selection is restricted to
/// eligible conditions (unsatisfied, and inside an organization group pinned
/// to its matched parent). Generation stops at the terminating separator or
/// at the length cap, and the sequence is repaired before recovery.
pub fn generate(
    model: &Model,
    cond: &ConditionSet,
    z: &StructureCode,
    opts: &DecodeOptions,
) -> Result<GenerationResult, TaskError> {
    cond.check().map_err(TaskError::InvalidConditions)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xdec0de);
    let mut state = GenerationState::new(cond.attributes.len(), cond.organizations.clone());
    let max_items = model.config.max_seq;
    let d = model.config.d_model;
    let mut truncated = false;

    loop {
        if state.terminated() {
            break;
        }
        if state.emitted.len() >= max_items {
            truncated = true;
            break;
        }

        let mut tape = Tape::new(&model.params);
        // context code for this round
        let item_embeds = if state.emitted.is_empty() {
            None
        } else {
            Some(model.embedder.embed_items(&mut tape, &state.emitted)?)
        };
        let e_token = context_codes(model, &mut tape, item_embeds, &[state.round_context()])?[0];

        // condition tokens and the structure code token
        let cond_tokens = if cond.attributes.is_empty() {
            None
        } else {
            let rows: Vec<EmbedRow> = cond.attributes.iter().map(EmbedRow::from).collect();
            Some(model.embedder.embed_rows(&mut tape, &rows)?)
        };
        let z_row = tape.constant(Array2::from_shape_vec((1, z.z.len()), z.z.clone()).unwrap());
        let z_token = model.z_proj.forward(&mut tape, z_row);

        // a separator is structurally forced exactly when the level closed
        if state.level_closed() {
            state.push(SeqItem::LevelSep)?;
            continue;
        }

        // substep 1
        let (f1, idx1) = generator_forward(
            model,
            &mut tape,
            cond_tokens,
            &cond.organizations,
            state.satisfied(),
            z_token,
            e_token,
            vec![],
        )?;
        let r1 = tape.rows(f1, &[idx1.e_of(0)]);
        let b34 = model.heads.b34.forward(&mut tape, r1);
        let wants_condition = sample_binary(tape.value(b34)[[0, 1]], opts, &mut rng);
        let candidates = state.selection_candidates();
        let any_candidate = candidates.iter().any(|&b| b);

        // substep 2: selection among eligible conditions
        let p1 = model.heads.p1.forward(&mut tape, r1);
        let mut selected: Option<usize> = None;
        if wants_condition && any_candidate {
            let (f2, idx2) = generator_forward(
                model,
                &mut tape,
                cond_tokens,
                &cond.organizations,
                state.satisfied(),
                z_token,
                e_token,
                vec![p1],
            )?;
            let sat = state.satisfied();
            // the trained softmax competes attribute and organization
            // features; only unsatisfied attribute conditions are selectable
            let mut feat_rows = Vec::new();
            let mut allowed = Vec::new();
            let mut cond_of_row = Vec::new();
            for c in 0..cond.attributes.len() {
                if !sat.attr[c] {
                    feat_rows.push(idx2.cond(c));
                    allowed.push(candidates[c]);
                    cond_of_row.push(Some(c));
                }
            }
            for (j, org_sat) in sat.org.iter().enumerate() {
                if !org_sat {
                    feat_rows.push(idx2.org(j));
                    allowed.push(false);
                    cond_of_row.push(None);
                }
            }
            let r2 = tape.rows(f2, &[idx2.appended_of(0, 0)]);
            let feats = tape.rows(f2, &feat_rows);
            let probs = tape.selection_probs_value(r2, feats);
            if let Some(row) = sample_from_probs(&probs, &allowed, opts, &mut rng) {
                selected = cond_of_row[row];
            }
        }

        // substep 3: attributes, with the selected condition's values forced
        let p2 = match selected {
            Some(c) => {
                let ct = cond_tokens.expect("selection implies conditions");
                tape.rows(ct, &[c])
            }
            None => tape.zeros(1, d),
        };
        let (f3, idx3) = generator_forward(
            model,
            &mut tape,
            cond_tokens,
            &cond.organizations,
            state.satisfied(),
            z_token,
            e_token,
            vec![p1, p2],
        )?;
        let r3 = tape.rows(f3, &[idx3.appended_of(0, 1)]);
        let logits = attr_logits(model, &mut tape, r3);
        let mut attrs = [0u16; 5];
        for k in 0..5 {
            let row: Vec<f64> = tape.value(logits[k]).row(0).to_vec();
            attrs[k] = sample_categorical(&row, opts, &mut rng) as u16;
        }
        if let Some(c) = selected {
            let forced = cond.attributes[c].as_array();
            for k in 0..5 {
                if let Some(v) = forced[k] {
                    attrs[k] = v;
                }
            }
        }

        // substep 4: structural flags
        let p3 = model.embedder.embed_rows(&mut tape, &[EmbedRow::from_attrs(attrs)])?;
        let (f4, idx4) = generator_forward(
            model,
            &mut tape,
            cond_tokens,
            &cond.organizations,
            state.satisfied(),
            z_token,
            e_token,
            vec![p1, p2, p3],
        )?;
        let r4 = tape.rows(f4, &[idx4.appended_of(0, 2)]);
        let b12 = model.heads.b12.forward(&mut tape, r4);
        let leaf_kind = model.space.vocabulary.is_leaf(attrs[4]);
        let leaf = leaf_kind || sample_binary(tape.value(b12)[[0, 0]], opts, &mut rng);
        let last_child = if state.level() == 1 {
            true // the single root closes the virtual parent
        } else {
            sample_binary(tape.value(b12)[[0, 1]], opts, &mut rng)
        };

        let node = SeqNode {
            x: attrs[0],
            y: attrs[1],
            w: attrs[2],
            h: attrs[3],
            t: attrs[4],
            leaf,
            last_child,
        };
        let position = state.push(SeqItem::Node(node))?;
        if let Some(c) = selected {
            state.mark_satisfied(c, position);
        }
    }

    finish(model, cond, z, state, truncated)
}

fn finish(
    model: &Model,
    cond: &ConditionSet,
    z: &StructureCode,
    state: GenerationState,
    truncated: bool,
) -> Result<GenerationResult, TaskError> {
    let raw = TokenSequence::new(state.emitted.clone());
    let (sequence, repair_log, mapping) =
        repair_sequence(&raw).ok_or(TaskError::EmptyGeneration)?;
    let tree = deserialize(&sequence, model.space.vocabulary.clone(), model.space.grid.clone())?;
    let paths = position_paths(&sequence)?;
    let satisfaction = (0..cond.attributes.len())
        .map(|c| {
            let path = state
                .matched_node(c)
                .and_then(|pos| mapping.get(pos).copied().flatten())
                .and_then(|new_pos| paths.get(&new_pos).cloned());
            CondReport { satisfied: path.is_some(), node_path: path }
        })
        .collect();
    Ok(GenerationResult {
        sequence,
        raw_sequence: raw,
        tree,
        satisfaction,
        z: z.z.clone(),
        repair_log,
        truncated,
    })
}

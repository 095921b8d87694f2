use crate::generate::{generate, GenerationResult};
use crate::TaskError;
use layout_core::{ConditionSet, LayoutTree, TaskKind};
use layout_corpus::make_condition_set;
use layout_model::{encode_structure, DecodeOptions, Model, StructureCode};
use layout_seq::{extract_structure_sequence, serialize};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How many generate-encode rounds structure extraction runs.
pub const STRUCT_EXTR_ITERATIONS: usize = 3;

/// Inputs of one task invocation. Conditions are either explicit or derived
/// from a source layout by the task's masking recipe; structure transfer
/// additionally needs the reference layout whose structure is reused.
#[derive(Debug, Clone, Default)]
pub struct TaskInputs<'a> {
    pub conditions: Option<ConditionSet>,
    pub source: Option<&'a LayoutTree>,
    pub reference: Option<&'a LayoutTree>,
}

/// Run one of the seven tasks.
///
/// GenT, GenTS, UGen, Completion and GenO sample the structure code from the
/// prior. Structure extraction iterates: generate, re-encode the generated
/// structure (posterior mean), regenerate. Structure transfer encodes the
/// reference layout's leaf-pruned sequence (posterior mean) and generates the
/// source elements under it.
pub fn run_task(
    model: &Model,
    task: TaskKind,
    inputs: TaskInputs<'_>,
    opts: &DecodeOptions,
) -> Result<GenerationResult, TaskError> {
    let conditions = resolve_conditions(task, &inputs, opts.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5a5a_1234);

    match task {
        TaskKind::GenT
        | TaskKind::GenTS
        | TaskKind::UGen
        | TaskKind::Completion
        | TaskKind::GenO => {
            let z = StructureCode::sample_prior(model.config.d_z, &mut rng);
            generate(model, &conditions, &z, opts)
        }
        TaskKind::StructExtr => {
            let mut z = StructureCode::sample_prior(model.config.d_z, &mut rng);
            let mut result = generate(model, &conditions, &z, opts)?;
            for _ in 1..STRUCT_EXTR_ITERATIONS {
                let seq = serialize(&result.tree)?;
                let structure = extract_structure_sequence(&seq)?;
                z = encode_structure(model, &structure, false, &mut rng)?;
                result = generate(model, &conditions, &z, opts)?;
            }
            Ok(result)
        }
        TaskKind::StructTran => {
            let reference = inputs.reference.ok_or(TaskError::MissingReference)?;
            let seq = serialize(reference)?;
            let structure = extract_structure_sequence(&seq)?;
            let z = encode_structure(model, &structure, false, &mut rng)?;
            generate(model, &conditions, &z, opts)
        }
    }
}

fn resolve_conditions(
    task: TaskKind,
    inputs: &TaskInputs<'_>,
    seed: u64,
) -> Result<ConditionSet, TaskError> {
    if let Some(cond) = &inputs.conditions {
        cond.check().map_err(TaskError::InvalidConditions)?;
        return Ok(cond.clone());
    }
    if task == TaskKind::UGen {
        return Ok(ConditionSet::empty());
    }
    let source = inputs.source.ok_or(TaskError::MissingSource)?;
    Ok(make_condition_set(source, task, seed))
}

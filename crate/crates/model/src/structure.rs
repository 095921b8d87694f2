use crate::masks::structure_mask;
use crate::nn::{Tape, Var};
use crate::{Model, ModelError};
use layout_seq::TokenSequence;
use ndarray::Array2;
use rand::Rng;
use std::sync::Arc;

/// A structure latent: the code itself plus the posterior parameters when it
/// came from the encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureCode {
    pub z: Vec<f64>,
    pub mean: Option<Vec<f64>>,
    pub logvar: Option<Vec<f64>>,
}

impl StructureCode {
    pub fn from_vec(z: Vec<f64>) -> Self {
        Self { z, mean: None, logvar: None }
    }

    /// Draw from the standard-normal prior.
    pub fn sample_prior<R: Rng>(d_z: usize, rng: &mut R) -> Self {
        let z = (0..d_z)
            .map(|_| {
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        Self { z, mean: None, logvar: None }
    }
}

/// Tape-level encoder pass: returns `(z, mean, logvar)` variables. `eps`,
/// when given, reparameterizes a sample `z = mean + exp(logvar / 2) * eps`;
/// otherwise `z = mean`.
pub fn encode_structure_on_tape(
    model: &Model,
    tape: &mut Tape,
    struct_seq: &TokenSequence,
    eps: Option<&[f64]>,
) -> Result<(Var, Var, Var), ModelError> {
    if struct_seq.len() + 1 > model.config.max_seq + 8 {
        return Err(ModelError::Capacity {
            len: struct_seq.len(),
            max: model.config.max_seq,
        });
    }
    let mask = Arc::new(structure_mask(&struct_seq.items)?);
    let items = model.embedder.embed_items(tape, &struct_seq.items)?;
    let cls = model.embedder.special(tape, model.embedder.cls, 1);
    let input = tape.concat_rows(&[cls, items]);
    let features = model.encoder.stack.forward(tape, input, &mask);
    let pooled = tape.rows(features, &[0]);
    let mean = model.encoder.head_mean.forward(tape, pooled);
    let logvar = model.encoder.head_logvar.forward(tape, pooled);
    let z = match eps {
        None => mean,
        Some(eps) => {
            assert_eq!(eps.len(), model.config.d_z);
            let half = tape.scale(logvar, 0.5);
            let std = tape.exp(half);
            let eps_var = tape.constant(Array2::from_shape_vec((1, eps.len()), eps.to_vec()).unwrap());
            let noise = tape.mul(std, eps_var);
            tape.add(mean, noise)
        }
    };
    Ok((z, mean, logvar))
}

/// Encode a structure sequence to a [`StructureCode`]. With `sample = false`
/// the code is the posterior mean (deterministic); with `sample = true` it is
/// reparameterized with noise from `rng`.
pub fn encode_structure<R: Rng>(
    model: &Model,
    struct_seq: &TokenSequence,
    sample: bool,
    rng: &mut R,
) -> Result<StructureCode, ModelError> {
    let eps: Option<Vec<f64>> = sample.then(|| {
        (0..model.config.d_z)
            .map(|_| {
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect()
    });
    let mut tape = Tape::new(&model.params);
    let (z, mean, logvar) = encode_structure_on_tape(model, &mut tape, struct_seq, eps.as_deref())?;
    Ok(StructureCode {
        z: tape.value(z).row(0).to_vec(),
        mean: Some(tape.value(mean).row(0).to_vec()),
        logvar: Some(tape.value(logvar).row(0).to_vec()),
    })
}

use crate::config::{LayoutSpace, ModelConfig};
use crate::embed::NodeEmbedder;
use crate::nn::{LinearParams, MlpParams, ParamId, ParamStore, StackParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Structure encoder: masked Transformer plus the variational heads.
#[derive(Debug, Clone)]
pub struct StructureEncoderParams {
    pub stack: StackParams,
    pub head_mean: LinearParams,
    pub head_logvar: LinearParams,
}

/// Context encoder: the two local FC layers plus the global Transformer.
#[derive(Debug, Clone)]
pub struct ContextParams {
    pub fc_parent: LinearParams,
    pub fc_sibling: LinearParams,
    pub stack: StackParams,
    pub positional: ParamId,
}

/// Conditional layout generator: the Transformer block and its positional
/// table (positions are assigned by token role, so every decoding round sees
/// the same indices).
#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub stack: StackParams,
    pub positional: ParamId,
}

/// All prediction heads hanging off generator features.
#[derive(Debug, Clone)]
pub struct Heads {
    /// Substep 1: is-separator and wants-a-condition logits.
    pub b34: MlpParams,
    /// Substep 2: the token carrying `r1` back into the input.
    pub p1: MlpParams,
    /// Substep 3: one categorical head per attribute.
    pub attr_x: MlpParams,
    pub attr_y: MlpParams,
    pub attr_w: MlpParams,
    pub attr_h: MlpParams,
    pub attr_t: MlpParams,
    /// Substep 4: is-leaf and is-last-child logits.
    pub b12: MlpParams,
}

/// The complete model: configuration, categorical space, parameters, and the
/// component handles into the parameter store.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub space: LayoutSpace,
    pub params: ParamStore,
    pub embedder: NodeEmbedder,
    pub encoder: StructureEncoderParams,
    pub z_proj: LinearParams,
    pub context: ContextParams,
    pub generator: GeneratorParams,
    pub heads: Heads,
}

impl Model {
    /// Initialize a fresh model; parameters are deterministic per seed.
    pub fn new(config: ModelConfig, space: LayoutSpace, seed: u64) -> Self {
        config.validate().expect("invalid model configuration");
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.d_model;
        let pos_rows = config.max_seq + 8;

        let embedder = NodeEmbedder::create(&mut store, &mut rng, &space, d);
        let encoder = StructureEncoderParams {
            stack: StackParams::create(
                &mut store,
                &mut rng,
                "enc",
                config.enc_layers,
                d,
                config.d_ff,
                config.heads,
            ),
            head_mean: LinearParams::create(&mut store, &mut rng, "enc.mean", d, config.d_z),
            head_logvar: LinearParams::create(&mut store, &mut rng, "enc.logvar", d, config.d_z),
        };
        let z_proj = LinearParams::create(&mut store, &mut rng, "zproj", config.d_z, d);
        let context = ContextParams {
            fc_parent: LinearParams::create(&mut store, &mut rng, "ctx.parent", d, d),
            fc_sibling: LinearParams::create(&mut store, &mut rng, "ctx.sibling", d, d),
            stack: StackParams::create(
                &mut store,
                &mut rng,
                "ctx",
                config.enc_layers,
                d,
                config.d_ff,
                config.heads,
            ),
            positional: store.add_embedding(&mut rng, "ctx.pos", pos_rows, d),
        };
        let generator = GeneratorParams {
            stack: StackParams::create(
                &mut store,
                &mut rng,
                "gen",
                config.gen_layers,
                d,
                config.d_ff,
                config.heads,
            ),
            positional: store.add_embedding(&mut rng, "gen.pos", pos_rows, d),
        };
        let bins = space.bins();
        let heads = Heads {
            b34: MlpParams::create(&mut store, &mut rng, "head.b34", d, d, 2),
            p1: MlpParams::create(&mut store, &mut rng, "head.p1", d, d, d),
            attr_x: MlpParams::create(&mut store, &mut rng, "head.x", d, d, bins[0]),
            attr_y: MlpParams::create(&mut store, &mut rng, "head.y", d, d, bins[1]),
            attr_w: MlpParams::create(&mut store, &mut rng, "head.w", d, d, bins[2]),
            attr_h: MlpParams::create(&mut store, &mut rng, "head.h", d, d, bins[3]),
            attr_t: MlpParams::create(&mut store, &mut rng, "head.t", d, d, space.n_types()),
            b12: MlpParams::create(&mut store, &mut rng, "head.b12", d, d, 2),
        };

        Self { config, space, params: store, embedder, encoder, z_proj, context, generator, heads }
    }
}

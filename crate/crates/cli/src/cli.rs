//! The `layoutgen` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.

use crate::evaluate::{evaluate, to_csv};
use crate::render::{render_svg, LevelView, RenderSpec};
use crate::settings::Settings;
use clap::{Args, Parser, Subcommand};
use layout_core::{read_layout_file, write_layout_file, LayoutTree, TaskKind};
use layout_corpus::{generate_synthetic, ingest_rico_like, split};
use layout_model::{DecodeMode, DecodeOptions, LayoutSpace, Model};
use layout_seq::{deserialize, random_tree, serialize};
use layout_tasks::{run_task, ResultReport, TaskInputs, TaskRequestFile};
use layout_train::{train, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "layoutgen", about = "Conditional structured layout generation", version)]
pub struct Cli {
    /// Base directory all relative paths resolve against.
    #[arg(long, global = true, default_value = ".")]
    pub workdir: PathBuf,
    /// Emit machine-readable JSON errors on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Key-value configuration file overriding built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for anything stochastic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Ingest a directory of layout JSON files into a normalized corpus.
    Ingest(IngestArgs),
    /// Generate a synthetic corpus from the structured-layout grammar.
    Synth(SynthArgs),
    /// Train a model on a corpus directory.
    Train(TrainArgs),
    /// Run a generation task with a trained model.
    Generate(GenerateArgs),
    /// Compute element and structure metrics of a corpus against a reference.
    Evaluate(EvaluateArgs),
    /// Extract a structure for a complete element set (iterated re-encoding).
    Extract(ExtractArgs),
    /// Transfer the structure of a reference layout onto other elements.
    Transfer(TransferArgs),
    /// Render a layout to SVG.
    Render(RenderArgs),
    /// Serialize/deserialize random trees and verify exact recovery.
    RoundtripCheck(RoundtripArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Convert public RICO hierarchy JSON instead of the native schema.
    #[arg(long)]
    pub rico: bool,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Corpus directory (uses train.txt/test.txt manifests when present).
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub task: Option<TaskKind>,
    /// Layout file conditions are derived from (per the task's recipe).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Task request file (overrides --task/--input).
    #[arg(long)]
    pub request: Option<PathBuf>,
    /// Reference layout for structure transfer.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Greedy decoding instead of top-k sampling.
    #[arg(long)]
    pub greedy: bool,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Write the JSON report here (stdout otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also export the per-layout table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TransferArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    /// Layout whose elements are re-structured.
    #[arg(long)]
    pub elements: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// visible | levels | overlay
    #[arg(long, default_value = "visible")]
    pub mode: LevelView,
    /// Pixel size of one panel.
    #[arg(long, default_value_t = 320)]
    pub px: u32,
}

#[derive(Args)]
pub struct RoundtripArgs {
    #[arg(long, default_value_t = 10000)]
    pub n: usize,
}

/// Error carrying the exit code contract.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Model(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Model(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Model(_) => "model",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Model(m) => m,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn model_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Model(e.to_string())
}

/// Entry point used by `main` and tests; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("{e}");
            return 1;
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            if json {
                println!(
                    "{}",
                    serde_json::json!({ "error": e.message(), "kind": e.kind(), "code": e.code() })
                );
            }
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = match &cli.config {
        Some(path) => Settings::from_file(&cli.workdir.join(path)).map_err(CliError::Usage)?,
        None => Settings::default(),
    };
    let at = |p: &Path| -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            cli.workdir.join(p)
        }
    };

    match &cli.command {
        Command::Ingest(args) => cmd_ingest(args, &settings, cli.seed, &at, cli.json),
        Command::Synth(args) => cmd_synth(args, &settings, cli.seed, &at, cli.json),
        Command::Train(args) => cmd_train(args, &settings, cli.seed, &at, cli.json),
        Command::Generate(args) => cmd_generate(args, cli.seed, &at, cli.json),
        Command::Evaluate(args) => cmd_evaluate(args, &settings, &at),
        Command::Extract(args) => cmd_extract(args, cli.seed, &at, cli.json),
        Command::Transfer(args) => cmd_transfer(args, cli.seed, &at, cli.json),
        Command::Render(args) => cmd_render(args, &settings, &at),
        Command::RoundtripCheck(args) => cmd_roundtrip(args, &settings, cli.seed),
    }
}

/// Load every `*.layout.json` of a directory (sorted), optionally restricted
/// to a manifest of file names.
fn load_corpus_dir(
    dir: &Path,
    settings: &Settings,
    manifest: Option<&str>,
) -> Result<Vec<(String, LayoutTree)>, CliError> {
    let vocabulary = settings.vocabulary().map_err(CliError::Usage)?;
    let grid = settings.grid().map_err(CliError::Usage)?;
    let names: Vec<String> = match manifest {
        Some(file) => {
            let text = std::fs::read_to_string(dir.join(file)).map_err(data)?;
            text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
        }
        None => {
            let mut names: Vec<String> = std::fs::read_dir(dir)
                .map_err(data)?
                .filter_map(|e| e.ok())
                .filter_map(|e| e.file_name().to_str().map(String::from))
                .filter(|n| n.ends_with(".layout.json"))
                .collect();
            names.sort();
            names
        }
    };
    names
        .into_iter()
        .map(|name| {
            read_layout_file(&dir.join(&name), vocabulary.clone(), &grid)
                .map(|t| (name, t))
                .map_err(data)
        })
        .collect()
}

fn write_corpus(
    dir: &Path,
    trees: &[LayoutTree],
    train_names: &[String],
    test_names: &[String],
    names: &[String],
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(data)?;
    for (name, tree) in names.iter().zip(trees) {
        write_layout_file(&dir.join(name), tree).map_err(data)?;
    }
    std::fs::write(dir.join("train.txt"), train_names.join("\n") + "\n").map_err(data)?;
    std::fs::write(dir.join("test.txt"), test_names.join("\n") + "\n").map_err(data)?;
    Ok(())
}

fn cmd_ingest(
    args: &IngestArgs,
    settings: &Settings,
    seed: u64,
    at: &dyn Fn(&Path) -> PathBuf,
    json: bool,
) -> Result<(), CliError> {
    let input = at(&args.input);
    let out = at(&args.out);
    let config = settings.corpus_config(seed).map_err(CliError::Usage)?;

    let (trees, report) = if args.rico {
        // convert RICO hierarchies in place first, then ingest the result
        let tmp = out.join("_converted");
        std::fs::create_dir_all(&tmp).map_err(data)?;
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&input)
            .map_err(data)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        entries.sort();
        for path in entries {
            let text = std::fs::read_to_string(&path).map_err(data)?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(data)?;
            let raw = layout_corpus::rico::convert_rico_value(&value).map_err(data)?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("layout");
            let converted = tmp.join(format!("{name}.layout.json"));
            std::fs::write(&converted, serde_json::to_string_pretty(&raw).map_err(data)?)
                .map_err(data)?;
        }
        let r = ingest_rico_like(&tmp, &config).map_err(data)?;
        std::fs::remove_dir_all(&tmp).ok();
        r
    } else {
        ingest_rico_like(&input, &config).map_err(data)?
    };

    let names: Vec<String> = (0..trees.len()).map(|i| format!("t{i:05}.layout.json")).collect();
    let (train_set, test_set) = split(&trees, &config);
    let (train_names, test_names) = manifest_names(&trees, &train_set, &test_set, &names);
    write_corpus(&out, &trees, &train_names, &test_names, &names)?;
    if json {
        println!(
            "{}",
            serde_json::json!({
                "files": report.files,
                "kept": report.kept,
                "dropped": report.dropped,
                "nodes_dropped": report.nodes_dropped,
                "reasons": report.drop_reasons,
            })
        );
    } else {
        println!(
            "ingested {} files: kept={} dropped={} (nodes dropped: {})",
            report.files, report.kept, report.dropped, report.nodes_dropped
        );
    }
    Ok(())
}

/// Recover which file names landed in each split (splits preserve corpus
/// order, so a two-pointer walk suffices).
fn manifest_names(
    corpus: &[LayoutTree],
    train_set: &[LayoutTree],
    test_set: &[LayoutTree],
    names: &[String],
) -> (Vec<String>, Vec<String>) {
    let mut train_names = Vec::with_capacity(train_set.len());
    let mut test_names = Vec::with_capacity(test_set.len());
    let mut ti = 0;
    let mut si = 0;
    for (i, tree) in corpus.iter().enumerate() {
        if ti < train_set.len() && train_set[ti].root == tree.root {
            train_names.push(names[i].clone());
            ti += 1;
        } else if si < test_set.len() && test_set[si].root == tree.root {
            test_names.push(names[i].clone());
            si += 1;
        }
    }
    (train_names, test_names)
}

fn cmd_synth(
    args: &SynthArgs,
    settings: &Settings,
    seed: u64,
    at: &dyn Fn(&Path) -> PathBuf,
    json: bool,
) -> Result<(), CliError> {
    let out = at(&args.out);
    let spec = settings.grammar().map_err(CliError::Usage)?;
    let config = settings.corpus_config(seed).map_err(CliError::Usage)?;
    let trees = generate_synthetic(&spec, args.n, seed);
    let names: Vec<String> = (0..trees.len()).map(|i| format!("s{i:05}.layout.json")).collect();
    let (train_set, test_set) = split(&trees, &config);
    let (train_names, test_names) = manifest_names(&trees, &train_set, &test_set, &names);
    write_corpus(&out, &trees, &train_names, &test_names, &names)?;
    if json {
        println!(
            "{}",
            serde_json::json!({"written": trees.len(), "train": train_names.len(), "test": test_names.len()})
        );
    } else {
        println!(
            "wrote {} synthetic layouts ({} train / {} test) to {}",
            trees.len(),
            train_names.len(),
            test_names.len(),
            out.display()
        );
    }
    Ok(())
}

fn cmd_train(
    args: &TrainArgs,
    settings: &Settings,
    seed: u64,
    at: &dyn Fn(&Path) -> PathBuf,
    json: bool,
) -> Result<(), CliError> {
    let corpus_dir = at(&args.corpus);
    let out = at(&args.out);
    std::fs::create_dir_all(&out).map_err(data)?;

    let has_manifest = corpus_dir.join("train.txt").exists();
    let (train_trees, eval_trees): (Vec<LayoutTree>, Vec<LayoutTree>) = if has_manifest {
        let tr = load_corpus_dir(&corpus_dir, settings, Some("train.txt"))?;
        let te = load_corpus_dir(&corpus_dir, settings, Some("test.txt"))?;
        (tr.into_iter().map(|(_, t)| t).collect(), te.into_iter().map(|(_, t)| t).collect())
    } else {
        let all = load_corpus_dir(&corpus_dir, settings, None)?;
        let trees: Vec<LayoutTree> = all.into_iter().map(|(_, t)| t).collect();
        let config = settings.corpus_config(seed).map_err(CliError::Usage)?;
        split(&trees, &config)
    };
    if train_trees.is_empty() {
        return Err(CliError::Data("no training layouts found".into()));
    }

    let model_config = settings.model_config().map_err(CliError::Usage)?;
    let space = LayoutSpace::new(
        settings.vocabulary().map_err(CliError::Usage)?,
        settings.grid().map_err(CliError::Usage)?,
    );
    let mut model = Model::new(model_config, space, seed);
    let train_config: TrainConfig = settings.train_config(seed).map_err(CliError::Usage)?;

    let metrics_path = out.join("metrics.ndjson");
    let mut metrics_file = std::fs::File::create(&metrics_path).map_err(data)?;
    use std::io::Write;
    let summary = train(&mut model, &train_trees, &eval_trees, &train_config, |epoch, loss, acc, m| {
        let record = serde_json::json!({"epoch": epoch, "loss": loss, "accuracy": acc});
        let _ = writeln!(metrics_file, "{record}");
        if !json {
            println!("epoch {epoch}: loss {loss:.4} heldout-accuracy {acc:.3}");
        }
        let _ = layout_model::checkpoint::save(m, &out.join("model.ckpt.json"), None);
    })
    .map_err(model_err)?;
    // per-step records after the per-epoch ones
    for (i, step) in summary.steps.iter().enumerate() {
        let record = serde_json::to_value(step).map_err(data)?;
        let mut obj = record.as_object().cloned().unwrap_or_default();
        obj.insert("step".into(), serde_json::json!(i));
        let _ = writeln!(metrics_file, "{}", serde_json::Value::Object(obj));
    }
    layout_model::checkpoint::save(&model, &out.join("model.ckpt.json"), None).map_err(model_err)?;
    if json {
        println!(
            "{}",
            serde_json::json!({
                "epochs": summary.epoch_loss.len(),
                "final_loss": summary.epoch_loss.last(),
                "final_accuracy": summary.epoch_accuracy.last(),
                "stopped_early": summary.stopped_early,
            })
        );
    } else {
        println!(
            "trained {} epochs (final loss {:.4}, heldout accuracy {:.3})",
            summary.epoch_loss.len(),
            summary.epoch_loss.last().copied().unwrap_or(f64::NAN),
            summary.epoch_accuracy.last().copied().unwrap_or(f64::NAN),
        );
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<Model, CliError> {
    let (model, _) = layout_model::checkpoint::load(path).map_err(model_err)?;
    Ok(model)
}

fn cmd_generate(
    args: &GenerateArgs,
    seed: u64,
    at: &dyn Fn(&Path) -> PathBuf,
    json: bool,
) -> Result<(), CliError> {
    let model = load_model(&at(&args.model))?;
    let out = at(&args.out);
    std::fs::create_dir_all(&out).map_err(data)?;

    let (task, conditions, source, reference, opts) = if let Some(request_path) = &args.request {
        let text = std::fs::read_to_string(at(request_path)).map_err(data)?;
        let request: TaskRequestFile = serde_json::from_str(&text).map_err(data)?;
        let task: TaskKind = request.task.parse().map_err(CliError::Usage)?;
        let seed = if request.seed != 0 { request.seed } else { seed };
        let opts = request
            .decode
            .as_ref()
            .map(|d| d.to_options(seed))
            .unwrap_or(DecodeOptions { seed, ..Default::default() });
        let conditions = request
            .conditions
            .as_ref()
            .map(|c| c.resolve(&model.space.vocabulary, &model.space.grid))
            .transpose()
            .map_err(data)?;
        let source = request
            .source
            .as_ref()
            .map(|p| {
                read_layout_file(&at(Path::new(p)), model.space.vocabulary.clone(), &model.space.grid)
            })
            .transpose()
            .map_err(data)?;
        let reference = request
            .reference
            .as_ref()
            .map(|p| {
                read_layout_file(&at(Path::new(p)), model.space.vocabulary.clone(), &model.space.grid)
            })
            .transpose()
            .map_err(data)?;
        (task, conditions, source, reference, opts)
    } else {
        let task = args
            .task
            .ok_or_else(|| CliError::Usage("either --task or --request is required".into()))?;
        let source = args
            .input
            .as_ref()
            .map(|p| read_layout_file(&at(p), model.space.vocabulary.clone(), &model.space.grid))
            .transpose()
            .map_err(data)?;
        let reference = args
            .reference
            .as_ref()
            .map(|p| read_layout_file(&at(p), model.space.vocabulary.clone(), &model.space.grid))
            .transpose()
            .map_err(data)?;
        let mode = if args.greedy { DecodeMode::Greedy } else { DecodeMode::Sample };
        let opts = DecodeOptions { mode, seed, ..Default::default() };
        (task, None, source, reference, opts)
    };

    let inputs = TaskInputs {
        conditions,
        source: source.as_ref(),
        reference: reference.as_ref(),
    };
    let result = run_task(&model, task, inputs, &opts).map_err(model_err)?;
    write_layout_file(&out.join("generated.layout.json"), &result.tree).map_err(data)?;
    let report = ResultReport::new(task.name(), opts.seed, &result);
    std::fs::write(
        out.join("report.json"),
        serde_json::to_string_pretty(&report).map_err(data)?,
    )
    .map_err(data)?;
    if json {
        println!(
            "{}",
            serde_json::json!({
                "nodes": result.tree.node_count(),
                "depth": result.tree.depth(),
                "satisfied": result.satisfied_count(),
                "conditions": result.satisfaction.len(),
                "truncated": result.truncated,
            })
        );
    } else {
        println!(
            "generated {} nodes (depth {}), satisfied {}/{} conditions -> {}",
            result.tree.node_count(),
            result.tree.depth(),
            result.satisfied_count(),
            result.satisfaction.len(),
            out.display()
        );
    }
    Ok(())
}

fn cmd_evaluate(
    args: &EvaluateArgs,
    settings: &Settings,
    at: &dyn Fn(&Path) -> PathBuf,
) -> Result<(), CliError> {
    let pred = load_corpus_dir(&at(&args.pred), settings, None)?;
    let reference: Vec<LayoutTree> = load_corpus_dir(&at(&args.reference), settings, None)?
        .into_iter()
        .map(|(_, t)| t)
        .collect();
    let report = evaluate(&pred, &reference);
    let text = serde_json::to_string_pretty(&report).map_err(data)?;
    match &args.out {
        Some(path) => std::fs::write(at(path), &text).map_err(data)?,
        None => println!("{text}"),
    }
    if let Some(csv) = &args.csv {
        std::fs::write(at(csv), to_csv(&report)).map_err(data)?;
    }
    Ok(())
}

fn cmd_extract(
    args: &ExtractArgs,
    seed: u64,
    at: &dyn Fn(&Path) -> PathBuf,
    json: bool,
) -> Result<(), CliError> {
    let model = load_model(&at(&args.model))?;
    let tree = read_layout_file(&at(&args.input), model.space.vocabulary.clone(), &model.space.grid)
        .map_err(data)?;
    let out = at(&args.out);
    std::fs::create_dir_all(&out).map_err(data)?;
    let opts = DecodeOptions { seed, ..Default::default() };
    let result = run_task(
        &model,
        TaskKind::StructExtr,
        TaskInputs { source: Some(&tree), ..Default::default() },
        &opts,
    )
    .map_err(model_err)?;
    write_layout_file(&out.join("extracted.layout.json"), &result.tree).map_err(data)?;
    let report = ResultReport::new("structextr", seed, &result);
    std::fs::write(out.join("report.json"), serde_json::to_string_pretty(&report).map_err(data)?)
        .map_err(data)?;
    if json {
        println!("{}", serde_json::json!({"nodes": result.tree.node_count(), "depth": result.tree.depth()}));
    } else {
        println!("extracted structure with {} nodes -> {}", result.tree.node_count(), out.display());
    }
    Ok(())
}

fn cmd_transfer(
    args: &TransferArgs,
    seed: u64,
    at: &dyn Fn(&Path) -> PathBuf,
    json: bool,
) -> Result<(), CliError> {
    let model = load_model(&at(&args.model))?;
    let reference =
        read_layout_file(&at(&args.reference), model.space.vocabulary.clone(), &model.space.grid)
            .map_err(data)?;
    let elements =
        read_layout_file(&at(&args.elements), model.space.vocabulary.clone(), &model.space.grid)
            .map_err(data)?;
    let out = at(&args.out);
    std::fs::create_dir_all(&out).map_err(data)?;
    let opts = DecodeOptions { seed, ..Default::default() };
    let result = run_task(
        &model,
        TaskKind::StructTran,
        TaskInputs { source: Some(&elements), reference: Some(&reference), ..Default::default() },
        &opts,
    )
    .map_err(model_err)?;
    write_layout_file(&out.join("transferred.layout.json"), &result.tree).map_err(data)?;
    let report = ResultReport::new("structtran", seed, &result);
    std::fs::write(out.join("report.json"), serde_json::to_string_pretty(&report).map_err(data)?)
        .map_err(data)?;
    if json {
        println!("{}", serde_json::json!({"nodes": result.tree.node_count(), "depth": result.tree.depth()}));
    } else {
        println!("transferred structure -> {}", out.display());
    }
    Ok(())
}

fn cmd_render(
    args: &RenderArgs,
    settings: &Settings,
    at: &dyn Fn(&Path) -> PathBuf,
) -> Result<(), CliError> {
    let vocabulary = settings.vocabulary().map_err(CliError::Usage)?;
    let grid = settings.grid().map_err(CliError::Usage)?;
    let tree = read_layout_file(&at(&args.input), vocabulary, &grid).map_err(data)?;
    let spec = RenderSpec {
        width: f64::from(args.px),
        height: f64::from(args.px),
        view: args.mode,
    };
    let svg = render_svg(&tree, &spec);
    std::fs::write(at(&args.out), svg).map_err(data)?;
    Ok(())
}

fn cmd_roundtrip(args: &RoundtripArgs, settings: &Settings, seed: u64) -> Result<(), CliError> {
    let vocabulary = settings.vocabulary().map_err(CliError::Usage)?;
    let grid = settings.grid().map_err(CliError::Usage)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exact = 0usize;
    for _ in 0..args.n {
        let tree = random_tree(&mut rng, &vocabulary, &grid, 60, 6);
        let seq = serialize(&tree).map_err(data)?;
        let back = deserialize(&seq, vocabulary.clone(), grid.clone()).map_err(data)?;
        if back.root == tree.root {
            exact += 1;
        }
    }
    println!("{exact}/{} exact", args.n);
    if exact != args.n {
        return Err(CliError::Data(format!("{} round-trips diverged", args.n - exact)));
    }
    Ok(())
}

//! Pipeline orchestration: the `layoutgen` subcommands, key-value settings,
//! SVG rendering, and corpus evaluation reports.

pub mod cli;
pub mod evaluate;
pub mod render;
pub mod settings;

pub use cli::{cli_main, Cli, CliError};
pub use evaluate::{evaluate as evaluate_corpus, to_csv, EvaluationReport, MetricsSummary};
pub use render::{render_svg, LevelView, RenderSpec};
pub use settings::Settings;

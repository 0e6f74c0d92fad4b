use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pixel_isac::experiment::{self, ExperimentConfig};
use pixel_isac::{Error, GainModel};

#[derive(Parser)]
#[command(name = "pixel-isac", version, about = "Pixel-based environment sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_model)]
    model: Option<GainModel>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate, estimate, reconstruct and score one scene.
    Pipeline(Common),
    /// MD/FA of both gain models over pixel sizes.
    SweepPixelSize {
        #[command(flatten)]
        common: Common,
        /// Comma-separated pixel sizes in meters; overrides `sweep.sizes`.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<f64>>,
    },
    /// Phase error versus target proportion.
    AnalyzeError(Common),
    /// Build and cache the measurement matrix.
    AssembleMatrix(Common),
}

fn parse_model(s: &str) -> Result<GainModel, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown model `{s}` (expected conventional or integral)"))
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf), Error> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(model) = common.model {
        cfg.model = model;
    }
    let out = common.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    cfg.out_dir = Some(out.clone());
    cfg.validate()?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<serde_json::Value, Error> {
    Ok(match cli.command {
        Command::Pipeline(c) => {
            let (cfg, out) = load(&c)?;
            let r = experiment::run_pipeline(&cfg, &out)?;
            serde_json::json!({ "metrics": r.reconstruction.metrics, "files": r.files })
        }
        Command::SweepPixelSize { common, sizes } => {
            let (cfg, out) = load(&common)?;
            let sizes = sizes.unwrap_or_else(|| cfg.sweep.sizes.clone());
            let (rows, path) = experiment::sweep_pixel_size(&cfg, &sizes, &out)?;
            serde_json::json!({ "rows": rows, "file": path })
        }
        Command::AnalyzeError(c) => {
            let (cfg, out) = load(&c)?;
            let (rows, path) = experiment::analyze_error(&cfg, &out)?;
            serde_json::json!({ "rows": rows, "file": path })
        }
        Command::AssembleMatrix(c) => {
            let (cfg, out) = load(&c)?;
            serde_json::to_value(experiment::assemble_matrix(&cfg, &out)?)?
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}

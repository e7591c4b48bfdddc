//! `rlie`: run the extraction pipeline stage by stage.
//!
//! Artifacts land in `--out-dir`:
//!
//! | stage             | artifacts                                           |
//! |-------------------|-----------------------------------------------------|
//! | `gen-data`        | `corpus.jsonl`                                      |
//! | `train-extractor` | `extractor.json`                                    |
//! | `build-pools`     | `pools.jsonl`, `templates.json`, `vocabulary.json`  |
//! | `train-agent`     | `checkpoint.json`, `metrics.jsonl`                  |
//! | `evaluate`        | `report.jsonl`, `report.txt`, `traces.jsonl`        |
//! | `baselines`       | `baselines.jsonl`, `baselines.txt`, `meta.json`     |
//!
//! plus one `<stage>.manifest.json` per stage.

mod artifacts;
mod config;
mod error;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::artifacts::OutDir;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "rlie",
    version,
    about = "Train and evaluate evidence-gathering extraction agents"
)]
struct Cli {
    /// TOML run configuration; defaults apply to anything it leaves out.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Override a config value, e.g. `--set train.epochs=3`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[arg(long, default_value = "out", global = true)]
    out_dir: PathBuf,

    /// Use upstream artifacts even when their manifests disagree with the
    /// current configuration.
    #[arg(long, global = true)]
    force: bool,

    /// Log progress to stderr (repeat for more detail).
    #[arg(long, short, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the synthetic corpus.
    GenData,
    /// Train the base extractor on training sources.
    TrainExtractor,
    /// Induce query templates and retrieve article queues for every event.
    BuildPools,
    /// Train the configured agent variant.
    TrainAgent,
    /// Run the trained agent once per test event.
    Evaluate,
    /// Score the extractor, aggregation baselines, meta-classifier and oracle.
    Baselines,
    /// Print the effective configuration as TOML.
    ShowConfig,
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let config = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Command::ShowConfig = cli.command {
        return toml::to_string(&config).map_err(|e| CliError::Usage(e.to_string()));
    }
    let out = OutDir::create(&cli.out_dir, cli.force)?;
    match cli.command {
        Command::GenData => stages::gen_data(&config, &out),
        Command::TrainExtractor => stages::train_extractor(&config, &out),
        Command::BuildPools => stages::build_pools(&config, &out),
        Command::TrainAgent => stages::train_agent(&config, &out),
        Command::Evaluate => stages::evaluate(&config, &out),
        Command::Baselines => stages::baselines(&config, &out),
        Command::ShowConfig => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

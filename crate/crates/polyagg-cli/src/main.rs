//! `polyagg`: command-line driver for polygonal mesh agglomeration.
//!
//! Six subcommands cover the pipeline: `generate` builds mesh corpora,
//! `train` fits the GNN bisector, `agglomerate` and `hierarchy` coarsen
//! meshes, `metrics` scores agglomerations, and `bench` times the backends.
//! Parameters come from flags, an optional `--config` TOML file, and (for
//! the seed) the `POLYAGG_SEED` environment variable, in that precedence
//! order. Every run writes an effective-config echo next to its outputs.
//!
//! Exit codes: 0 on success, 1 when the command line cannot be parsed, 2 on
//! configuration or data validation failures, 3 on numerical failures.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polyagg::{Error, Result};

use commands::{AgglomerateArgs, BenchArgs, GenerateArgs, HierarchyArgs, MetricsArgs, TrainArgs};
use config::{load_file_config, resolve_seed, FileConfig};

#[derive(Debug, Parser)]
#[command(
    name = "polyagg",
    version,
    about = "Agglomerate 2D polygonal meshes by recursive graph bisection",
    propagate_version = true
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for all randomness (falls back to the config file, then the
    /// POLYAGG_SEED environment variable, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a set of meshes plus a manifest listing them.
    Generate(GenerateArgs),
    /// Train the GNN bisector on generated mesh corpora.
    Train(TrainArgs),
    /// Coarsen one mesh to a target diameter.
    Agglomerate(AgglomerateArgs),
    /// Build a nested hierarchy of coarsenings.
    Hierarchy(HierarchyArgs),
    /// Score agglomerations with uniformity-factor and circle-ratio stats.
    Metrics(MetricsArgs),
    /// Time the bisection backends across mesh sizes.
    Bench(BenchArgs),
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };
    let seed = resolve_seed(cli.seed, file.seed)?;
    match cli.command {
        Command::Generate(args) => commands::cmd_generate(args, file.generate, seed),
        Command::Train(args) => commands::cmd_train(args, file.train, seed),
        Command::Agglomerate(args) => commands::cmd_agglomerate(args, file.agglomerate, seed),
        Command::Hierarchy(args) => commands::cmd_hierarchy(args, file.hierarchy, seed),
        Command::Metrics(args) => commands::cmd_metrics(args, file.metrics, seed),
        Command::Bench(args) => commands::cmd_bench(args, file.bench, seed),
    }
}

/// Exit code for a failed run: 3 for numerical failures, 2 for everything
/// else (bad configuration, bad data, I/O).
fn failure_code(err: &Error) -> u8 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests print to stdout and succeed; real
            // parse errors print to stderr and exit 1.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(failure_code(&err))
        }
    }
}

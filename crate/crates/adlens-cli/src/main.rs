//! `adlens` — pipeline CLI over the library: ingest → weaklabel → train →
//! evaluate → analyze, plus a gradient-check verifier.
//!
//! Every failure reaches stderr as `error[E_*]: message` with a nonzero
//! exit code. Outputs are deterministic given identical inputs and seeds;
//! wall-clock metadata goes to a separate `*.meta.json` file so the main
//! artifacts stay byte-stable.

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use adlens::error::Error;
use adlens_cli::commands;

#[derive(Parser)]
#[command(
    name = "adlens",
    version,
    about = "Weakly supervised theme/framing labeling, multi-task training, and campaign statistics for ad archives"
)]
struct Cli {
    /// TOML config with [model] and [strategy] tables; flags override it.
    #[arg(long, global = true, env = "ADLENS_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load, validate, optionally dedup, and re-emit an ad corpus.
    Ingest(commands::ingest::IngestArgs),
    /// Generate weak theme/framing labels for every ad.
    Weaklabel(commands::weaklabel::WeaklabelArgs),
    /// Train under one of the four supervision strategies.
    Train(commands::train::TrainArgs),
    /// Evaluate a checkpoint against labeled ads.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Emit the analysis report (aggregations, tests, causality).
    Analyze(commands::analyze::AnalyzeArgs),
    /// Verify analytic gradients against finite differences.
    Gradcheck(commands::gradcheck::GradcheckArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Ingest(args) => commands::ingest::run(args),
        Command::Weaklabel(args) => commands::weaklabel::run(args, cli.config.as_deref()),
        Command::Train(args) => commands::train::run(args, cli.config.as_deref()),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Analyze(args) => commands::analyze::run(args),
        Command::Gradcheck(args) => commands::gradcheck::run(args),
    };
    if let Err(err) = outcome {
        report_error(&err);
        std::process::exit(1);
    }
}

fn report_error(err: &Error) {
    eprintln!("error[{}]: {}", err.code(), err);
}

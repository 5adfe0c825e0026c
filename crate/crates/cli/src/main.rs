//! `proofforge`: the pipeline driver, one subcommand per stage.

mod config;
mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Overrides;
use stages::{CliError, Ctx};

#[derive(Debug, Parser)]
#[command(name = "proofforge", version, about = "Proof data construction, generation and evaluation pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override `max_attempts`.
    #[arg(long, global = true)]
    attempts: Option<u32>,
    /// Override `concurrency`.
    #[arg(long, global = true)]
    concurrency: Option<usize>,
    /// Backend name from `[backends]`.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Override `paths.out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Validate raw traces into trace.jsonl.
    Ingest,
    /// Render CoT prompts and collect step rationales.
    BuildCot,
    /// Apply the evaluation hold-out to the traces.
    Holdout,
    /// Assemble interleaved training instances from cot.jsonl.
    AssembleTrain,
    /// Generate and check proofs for the configured targets.
    Prove,
    /// Compute the evaluation report from attempts.jsonl.
    Evaluate,
    /// Run the four backend/context configurations.
    Ablate,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let overrides = Overrides { attempts: cli.attempts, concurrency: cli.concurrency, backend: cli.backend.clone(), out: cli.out };
    let loaded = config::load(&path, &overrides).map_err(CliError::Config)?;
    let ctx = Ctx { config: loaded.config, digest: loaded.digest, backend_override: cli.backend };
    match cli.command {
        Command::Ingest => stages::ingest(&ctx),
        Command::BuildCot => stages::build_cot(&ctx),
        Command::Holdout => stages::holdout(&ctx),
        Command::AssembleTrain => stages::assemble_train(&ctx),
        Command::Prove => stages::prove(&ctx),
        Command::Evaluate => stages::evaluate(&ctx),
        Command::Ablate => stages::ablate(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("proofforge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

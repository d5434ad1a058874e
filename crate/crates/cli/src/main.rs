//! `kginfluence`: batch pipeline from corpus ingestion to evaluation report.

mod common;
mod config;
mod evaluate;
mod extract;
mod ingest;
mod pairs;
mod train;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "kginfluence", version, about = "Knowledge-graph influence detection pipeline")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for extraction and scoring.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Master seed; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Read triples from sidecar files instead of calling the LLM.
    #[arg(long, global = true)]
    mock_extractor: bool,
    /// Output directory for train, evaluate and report.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Permit scoring training pairs.
    #[arg(long, global = true)]
    allow_train_eval: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalSplit {
    Test,
    Train,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch documents per subject into the corpus store.
    Ingest,
    /// Build one knowledge graph per document (resumable).
    Extract,
    /// Sample labeled same-subject pairs into the pair file.
    SamplePairs,
    /// Train the graph encoder and write checkpoint and loss curve.
    Train {
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Score all methods on held-out pairs and write the report.
    Evaluate {
        #[arg(long, value_enum, default_value_t = EvalSplit::Test)]
        split: EvalSplit,
    },
    /// Rebuild the report from existing score files.
    Report,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = RunConfig::load(cli.config.as_deref())?.finalize(cli.seed, cli.output, cli.mock_extractor)?;
    rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build_global()?;
    match cli.command {
        Command::Ingest => ingest::run(&cfg),
        Command::Extract => extract::run(&cfg),
        Command::SamplePairs => pairs::run(&cfg),
        Command::Train { resume } => train::run(&cfg, resume),
        Command::Evaluate { split } => evaluate::run(&cfg, split, cli.allow_train_eval),
        Command::Report => evaluate::report(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

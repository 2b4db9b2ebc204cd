//! `dxdebate`: run diagnostic debates, batch evaluations, pairing probes,
//! ground-truth audits and transcript replays.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime failures.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

use dxdebate::pipeline::PipelineKind;

#[derive(Debug, Parser)]
#[command(
    name = "dxdebate",
    version,
    about = "Multi-agent diagnostic debate engine"
)]
struct Cli {
    /// Engine configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Debate a single case between two agents.
    Debate(DebateArgs),
    /// Score a pipeline over every case of a dataset.
    Evaluate(EvaluateArgs),
    /// Probe agents and select the debate pair.
    Pair(PairArgs),
    /// Flag cases whose label disagrees with the final aggregate.
    Audit(AuditArgs),
    /// Recompute entropies and aggregation from a saved transcript.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Comma-separated agent ids from the roster.
    #[arg(long, value_delimiter = ',')]
    agents: Option<Vec<String>>,
    /// Case CSV; overrides the configured dataset.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output directory; overrides the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DebateArgs {
    #[command(flatten)]
    common: Common,
    /// Case id in the dataset.
    #[arg(long)]
    case: String,
    /// Restrict answers to the dataset's disease labels.
    #[arg(long)]
    restrict_labels: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PipelineArg {
    Single,
    Debate,
}

impl From<PipelineArg> for PipelineKind {
    fn from(p: PipelineArg) -> Self {
        match p {
            PipelineArg::Single => PipelineKind::Single,
            PipelineArg::Debate => PipelineKind::Debate,
        }
    }
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "debate")]
    pipeline: PipelineArg,
    /// Repetitions of the whole batch.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Worker threads; overrides the configured bound.
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    restrict_labels: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QualityArg {
    /// Top-3 score against the case label.
    Score,
    /// Judge score of the answer.
    Crit,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[command(flatten)]
    common: Common,
    /// Largest tolerated quality difference.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "score")]
    quality: QualityArg,
    /// Probe on at most this many cases.
    #[arg(long)]
    probe_cases: Option<usize>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "debate")]
    pipeline: PipelineArg,
    /// Probability margin the label must trail the top prediction by.
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    restrict_labels: bool,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    /// Saved transcript JSON.
    #[arg(long)]
    transcript: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_tracing() {
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_tracing();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

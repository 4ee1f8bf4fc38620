mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use promptevo_core::harness::AblationMode;

use commands::CommandError;
use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "promptevo", version, about = "Task-aware evolutionary prompt optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSONL dataset with id, question and reference fields.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// none | no_prompt_optimization | single_metric
    #[arg(long)]
    mode: Option<AblationMode>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use only the first N dataset items.
    #[arg(long)]
    limit: Option<usize>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, CommandError> {
        let overrides = Overrides {
            dataset: self.dataset.clone(),
            mode: self.mode,
            seed: self.seed,
            limit: self.limit,
            out: self.out.clone(),
        };
        Ok(RunConfig::load(self.config.as_deref(), &overrides)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify, select metrics, evolve a prompt and evaluate it on held-out items.
    Optimize(RunArgs),
    /// Score a given prompt on the dataset.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// File containing the prompt text.
        #[arg(long)]
        prompt_file: PathBuf,
        /// JSON metric plan; selected from the dataset when absent.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Print the task profile and metric plan for the dataset.
    Classify(RunArgs),
    /// Render a run's generation log as a table.
    Report {
        /// Run directory or generations.jsonl file.
        path: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::Optimize(args) => commands::optimize(&args.load()?),
        Command::Evaluate {
            run,
            prompt_file,
            plan,
        } => commands::evaluate(&run.load()?, &prompt_file, plan.as_deref()),
        Command::Classify(args) => commands::classify(&args.load()?),
        Command::Report { path } => commands::report(&path),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CommandError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CommandError::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod report;

use commands::{CommandContext, OutputFormat, EXIT_INVALID};
use config::AnalysisConfig;

/// Analyzer for generalized rational recurrences: trajectory simulation,
/// boundedness certificates, equilibrium location and local stability.
#[derive(Parser)]
#[command(name = "ratrec", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a trajectory and summarize it.
    Simulate(RunArgs),
    /// Check or search for an invariant-interval certificate.
    Certify(RunArgs),
    /// Locate and classify equilibrium points.
    Equilibria(RunArgs),
    /// Detailed stability report: polynomials, verdicts, comparisons.
    Stability(RunArgs),
    /// Run every analysis and emit one combined report plus plot data.
    Report(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the analysis config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config step count.
    #[arg(long)]
    steps: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Standard-output rendering of the report record.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

fn context_for(args: &RunArgs) -> Result<CommandContext> {
    let bytes = fs::read(&args.config)
        .with_context(|| format!("could not read config {}", args.config.display()))?;
    let config_hash = report::config_hash(&bytes);
    let text = String::from_utf8(bytes).context("config is not utf-8")?;
    let mut config = AnalysisConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if let Some(steps) = args.steps {
        config.run.steps = steps;
    }
    let out_dir = args.out.clone().or_else(|| config.outputs.dir.as_ref().map(PathBuf::from));
    Ok(CommandContext {
        config,
        config_hash,
        out_dir,
        format: match args.format {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        },
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Simulate(args) => ("simulate", args),
        Command::Certify(args) => ("certify", args),
        Command::Equilibria(args) => ("equilibria", args),
        Command::Stability(args) => ("stability", args),
        Command::Report(args) => ("report", args),
    };
    let code = context_for(args)
        .and_then(|ctx| commands::run(name, &ctx))
        .unwrap_or_else(|err| {
            eprintln!("error: {err:#}");
            EXIT_INVALID
        });
    ExitCode::from(code as u8)
}

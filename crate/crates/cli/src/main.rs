//! `annofilter` command-line tool.
//!
//! Exit codes: 0 on success, 1 for data errors, 2 for usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use annofilter::{KappaWeighting, LabelScale, Method};
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Debug, Parser)]
#[command(name = "annofilter", version, about = "Score annotators and measure what spam filtering does to label variation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score every annotator with one method and write scores.csv
    Score(ScoreArgs),
    /// Remove the k lowest-scoring annotators for k = 0..=k-max and write sweep.csv
    Sweep(SweepArgs),
    /// Replace gold spammers' labels with random or fixed answers
    Synth(SynthArgs),
    /// Write per-annotator entropy against method scores (scatter.csv)
    Scatter(ScatterArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Annotations CSV with header `item_id,annotator_id,label`
    #[arg(long)]
    input: PathBuf,
    /// Label scale as LO..HI; inferred from the data when omitted
    #[arg(long, value_parser = parse_scale)]
    scale: Option<LabelScale>,
    /// Output file; standard output when omitted
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MethodArgs {
    /// Master seed; each method derives its own sub-seed from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Agreement weights used by the kappa method
    #[arg(long, value_enum, default_value_t = Weighting::None)]
    kappa_weighting: Weighting,
    /// Random restarts for MACE
    #[arg(long, default_value_t = 50)]
    mace_restarts: usize,
    /// EM iterations per MACE restart
    #[arg(long, default_value_t = 50)]
    mace_iterations: usize,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Scoring method
    #[arg(long, value_parser = parse_method)]
    method: Method,
    #[command(flatten)]
    methods: MethodArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Roster CSV with header `annotator_id,is_spam`
    #[arg(long)]
    roster: PathBuf,
    /// Comma-separated methods (mace, crowdtruth, kappa, random)
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_method)]
    methods: Vec<Method>,
    /// Largest number of annotators to remove
    #[arg(long)]
    k_max: usize,
    #[command(flatten)]
    method_args: MethodArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Roster CSV with header `annotator_id,is_spam`
    #[arg(long)]
    roster: PathBuf,
    /// Spam behavior to synthesize
    #[arg(long, value_enum)]
    mode: SynthMode,
    /// Seed for random spam
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ScatterArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Roster CSV with header `annotator_id,is_spam`
    #[arg(long)]
    roster: PathBuf,
    /// Comma-separated methods (mace, crowdtruth, kappa, random)
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_method)]
    methods: Vec<Method>,
    #[command(flatten)]
    method_args: MethodArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SynthMode {
    Random,
    Fixed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Weighting {
    None,
    Linear,
    Quadratic,
}

impl From<Weighting> for KappaWeighting {
    fn from(w: Weighting) -> Self {
        match w {
            Weighting::None => KappaWeighting::None,
            Weighting::Linear => KappaWeighting::Linear,
            Weighting::Quadratic => KappaWeighting::Quadratic,
        }
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: annofilter::Error| e.to_string())
}

fn parse_scale(s: &str) -> Result<LabelScale, String> {
    s.parse().map_err(|e: annofilter::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score(args) => commands::score(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Synth(args) => commands::synth(args),
        Command::Scatter(args) => commands::scatter(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

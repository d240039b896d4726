//! The `hyperpack` command line: generators, audits, spectral checks, copy
//! counts, packing pipelines and the exact oracle, each writing a JSON report
//! plus a run manifest that `repro` can replay.

pub mod bench;
mod commands;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub use commands::{execute, Executed};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hyperpack",
    version,
    about = "Perfect packings in uniform hypergraphs"
)]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "HYPERPACK_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Write a random, parity or pattern hypergraph as an edge list.
    Gen(GenArgs),
    /// Density defect, degree profile and separability report.
    Audit(AuditArgs),
    /// Spectral bounds and a sampled mixing check.
    Spectral(SpectralArgs),
    /// Count injective copies of a pattern, optionally rooted.
    Count(CountArgs),
    /// Run the absorbing pipeline for a perfect packing.
    Pack(PackArgs),
    /// Run the absorbing pipeline for a perfect matching.
    Match(MatchArgs),
    /// Decide perfect packings by exhaustive search.
    Oracle(OracleArgs),
    /// Run one of the desk-scale regression experiments.
    Bench(BenchArgs),
    /// Re-run a manifest and compare output digests.
    Repro(ReproArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Audit(_) => "audit",
            Command::Spectral(_) => "spectral",
            Command::Count(_) => "count",
            Command::Pack(_) => "pack",
            Command::Match(_) => "match",
            Command::Oracle(_) => "oracle",
            Command::Bench(_) => "bench",
            Command::Repro(_) => "repro",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    Random,
    Parity,
    Pattern,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Library pattern for `--kind pattern`.
    #[arg(long, default_value = "cherry")]
    pub name: String,
    /// Emit the grid pattern of `--name` instead.
    #[arg(long)]
    pub grid: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AuditArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated vertex set to test for separability.
    #[arg(long, value_delimiter = ',')]
    pub set: Option<Vec<u32>>,
    #[arg(long)]
    pub json: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SpectralArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CountArgs {
    pub file: PathBuf,
    /// Library name or pattern file.
    #[arg(long)]
    pub pattern: String,
    /// Pinned vertices as `w=x` pairs, pattern vertex `w` to host vertex `x`.
    #[arg(long, value_delimiter = ',')]
    pub roots: Vec<String>,
    #[arg(long)]
    pub limit: Option<u64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyArg {
    Auto,
    Cherry,
    C4,
    Linear,
    Matching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    Calibrated,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PipelineArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub attempts: usize,
    #[arg(long, value_enum, default_value_t = FamilyArg::Calibrated)]
    pub family: FamilyArg,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub cert: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PackArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub pattern: String,
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    pub strategy: StrategyArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MatchArgs {
    pub file: PathBuf,
    /// Skip the spectral advisory.
    #[arg(long)]
    pub no_advisory: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OracleArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub pattern: String,
    #[arg(long, default_value_t = hyperpack_core::oracle::DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long)]
    pub json: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    /// Experiment number, 1 to 8.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
    pub criterion: u8,
    /// Base seed; experiments use consecutive seeds from here.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReproArgs {
    pub manifest: PathBuf,
    /// Keep the re-run outputs here instead of a temporary directory.
    #[arg(long)]
    pub keep: Option<PathBuf>,
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    schema: &'static str,
    kind: &'a str,
    message: String,
}

pub(crate) fn report_error(kind: &str, message: impl std::fmt::Display) {
    let d = Diagnostic {
        schema: "error/1",
        kind,
        message: message.to_string(),
    };
    eprintln!(
        "{}",
        serde_json::to_string(&d).expect("diagnostics serialize")
    );
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        EXIT_USAGE
                    } else {
                        EXIT_SUCCESS
                    }
                }
                _ => {
                    report_error("usage", e.render().to_string().trim_end());
                    EXIT_USAGE
                }
            };
        }
    };
    let pool = match cli.threads {
        Some(0) => {
            report_error("usage", "--threads must be positive");
            return EXIT_USAGE;
        }
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            report_error("runtime", e);
            return EXIT_USAGE;
        }
    };
    let argv: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    pool.install(|| manifest::run_recorded(cli.command, argv, cli.threads))
}

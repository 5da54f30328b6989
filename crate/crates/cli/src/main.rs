//! `smoothrank`: index a corpus, sample candidates, train smoothed rankers,
//! evaluate them and run epsilon sweeps.
//!
//! Exit codes: 0 on success, 1 on data errors, 2 on usage and I/O errors.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use smoothrank::retrieval::NegativeSampling;
use smoothrank::smoothing::Method;

#[derive(Parser)]
#[command(name = "smoothrank", version, about = "Label smoothing for pointwise neural rankers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the BM25 index of a JSONL document file.
    Index(IndexArgs),
    /// Build per-query candidate lists (1 relevant + n-1 sampled negatives).
    Sample(SampleArgs),
    /// Train a ranker on candidate lists.
    Train(TrainArgs),
    /// Compute R_n@K of a checkpoint and append it to a results file.
    Evaluate(EvaluateArgs),
    /// Train and evaluate every (policy, epsilon, seed) cell plus the hard baseline.
    Sweep(SweepArgs),
    /// Histogram of the normalized sampler scores of negative candidates.
    AnalyzeNs(AnalyzeArgs),
    /// Write a seeded synthetic collection (documents, queries, qrels).
    Generate(GenerateArgs),
    /// Re-run a train or sweep manifest and compare artifact digests.
    Rerun(RerunArgs),
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    docs: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    #[arg(long, default_value = "bm25", value_parser = parse_ns)]
    ns: NegativeSampling,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, default_value = "hard", value_parser = parse_method)]
    pub policy: Method,
    /// Defaults to 0.2 for smoothing policies and 0 for `hard`.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Instance index at which two-stage policies switch to hard labels
    /// (default: half the budget).
    #[arg(long)]
    pub switch_at: Option<u64>,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 50_000)]
    pub instances: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = smoothrank::ranker::DEFAULT_HIDDEN)]
    pub hidden: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub train_candidates: PathBuf,
    #[arg(long)]
    pub eval_candidates: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "t-ls,t-wsls", value_parser = parse_method)]
    pub policies: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5")]
    pub epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5", value_parser = parse_seed)]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub switch_at: Option<u64>,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 50_000)]
    pub instances: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = smoothrank::ranker::DEFAULT_HIDDEN)]
    pub hidden: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Number of comparisons for the Bonferroni correction.
    #[arg(long, default_value_t = 2)]
    pub bonferroni: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    documents: usize,
    #[arg(long, default_value_t = 200)]
    queries: usize,
    /// Trailing share of queries written to test_qrels.txt.
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
}

#[derive(Args)]
struct RerunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Where to write the re-run artifacts.
    #[arg(long)]
    out: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: smoothrank::Error| e.to_string())
}

fn parse_ns(s: &str) -> Result<NegativeSampling, String> {
    s.parse().map_err(|e: smoothrank::Error| e.to_string())
}

fn parse_seed(s: &str) -> Result<u64, String> {
    if s.trim().is_empty() {
        return Err("empty seed".into());
    }
    s.trim().parse().map_err(|e| format!("bad seed `{s}`: {e}"))
}

/// A failure, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<smoothrank::Error> for CliError {
    fn from(e: smoothrank::Error) -> Self {
        use smoothrank::Error as E;
        match e {
            E::Io { .. } | E::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index(a) => commands::index(&a.docs, &a.out),
        Command::Sample(a) => commands::sample(&a.index, &a.queries, &a.qrels, a.ns, a.n, a.seed, &a.out),
        Command::Train(a) => commands::train(a).map(|_| ()),
        Command::Evaluate(a) => commands::evaluate(&a.checkpoint, &a.candidates, &a.index, &a.queries, a.k, &a.out),
        Command::Sweep(a) => commands::sweep(a).map(|_| ()),
        Command::AnalyzeNs(a) => commands::analyze_ns(&a.candidates, &a.out),
        Command::Generate(a) => commands::generate(&a.out, a.seed, a.documents, a.queries, a.test_fraction),
        Command::Rerun(a) => commands::rerun(&a.manifest, &a.out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

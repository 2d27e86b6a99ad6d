//! `glovev` command-line interface.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure.

mod commands;
mod meta;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::run;

#[derive(Debug, Parser)]
#[command(name = "glovev", version, about = "GloVe embeddings with per-word covariance and uncertainty propagation")]
pub struct Cli {
    /// Worker threads for counting, variance and Monte-Carlo stages.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a vocabulary from newline-delimited text.
    Vocab(VocabArgs),
    /// Count inverse-distance weighted co-occurrences.
    Cooccur(CooccurArgs),
    /// Train GloVe with AdaGrad.
    Train(TrainArgs),
    /// Compute per-word covariance blocks and print a coverage report.
    Variance(VarianceArgs),
    /// Cosine similarity of word pairs with uncertainty.
    Similarity(SimilarityArgs),
    /// Rank candidate neighbors of a query word with adjacent-rank tests.
    Neighbors(NeighborsArgs),
    /// Cosine-similarity bias of attribute words between two groups.
    Bias(BiasArgs),
    /// WEAT effect size with uncertainty.
    Weat(WeatArgs),
    /// Draw word vectors from their estimated normal distribution.
    Sample(SampleArgs),
    /// Check that a file re-serializes byte-identically.
    Roundtrip(RoundtripArgs),
}

#[derive(Debug, Args)]
pub struct VocabArgs {
    /// Corpus: one record per line, whitespace-separated tokens.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output vocabulary file (`word count` per line).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    /// Lowercase tokens and drop non-alphabetic characters.
    #[arg(long)]
    pub normalize: bool,
    /// Recompute even if an up-to-date output exists.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct CooccurArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Output co-occurrence binary file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub window: usize,
    /// Count left context only.
    #[arg(long)]
    pub asymmetric: bool,
    /// Must match the flag used for `vocab`.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub cooccur: PathBuf,
    /// Output prefix; writes PREFIX.center.txt, .context.txt,
    /// .center_bias.txt, .context_bias.txt and .meta.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    #[arg(long, default_value_t = 80)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    /// Replace each trained center vector by its closed-form least-squares
    /// solution given the context vectors and constants.
    #[arg(long)]
    pub refit_center: bool,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    #[arg(long)]
    pub cooccur: PathBuf,
    /// Model prefix written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Output covariance binary file.
    #[arg(long)]
    pub out: PathBuf,
    /// Exact inverse used iff cond(H)·eps is below this.
    #[arg(long, default_value_t = 1e-10)]
    pub max_inverse_error: f64,
    /// Relative singular-value cutoff of the pseudo-inverse.
    #[arg(long, default_value_t = 1e-3)]
    pub pinv_cutoff: f64,
    /// Also write the coverage report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Delta,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Tsv,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub covariance: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Delta)]
    pub method: MethodArg,
    /// Monte-Carlo draws.
    #[arg(long, default_value_t = crate::propagate::DEFAULT_DRAWS)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Tsv)]
    pub format: OutputFormat,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Drop words without a covariance block instead of failing.
    #[arg(long)]
    pub allow_skip: bool,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// Word pair; repeat for several pairs.
    #[arg(long, num_args = 2, value_names = ["WORD_A", "WORD_B"], required = true)]
    pub pair: Vec<String>,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    #[arg(long)]
    pub word: String,
    /// Candidate word list (one per line).
    #[arg(long, conflicts_with = "top")]
    pub candidates: Option<PathBuf>,
    /// Use the N covered words with the highest point-estimate cosine.
    #[arg(long)]
    pub top: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BiasArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    #[arg(long)]
    pub attributes: PathBuf,
    #[arg(long)]
    pub group_a: PathBuf,
    #[arg(long)]
    pub group_b: PathBuf,
    /// Second query to test against the first: attributes, group A, group B.
    #[arg(long, num_args = 3, value_names = ["ATTRIBUTES", "GROUP_A", "GROUP_B"])]
    pub compare: Option<Vec<PathBuf>>,
}

#[derive(Debug, Args)]
pub struct WeatArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    #[arg(long)]
    pub targets_x: PathBuf,
    #[arg(long)]
    pub targets_y: PathBuf,
    #[arg(long)]
    pub attributes_a: PathBuf,
    #[arg(long)]
    pub attributes_b: PathBuf,
    /// Second query: targets X, targets Y, attributes A, attributes B.
    #[arg(long, num_args = 4, value_names = ["TARGETS_X", "TARGETS_Y", "ATTRIBUTES_A", "ATTRIBUTES_B"])]
    pub compare: Option<Vec<PathBuf>>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub covariance: PathBuf,
    #[arg(long)]
    pub word: String,
    #[arg(long, default_value_t = crate::propagate::DEFAULT_DRAWS)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Vocab,
    Cooccur,
    Vectors,
    Covariance,
}

#[derive(Debug, Args)]
pub struct RoundtripArgs {
    #[arg(long, value_enum)]
    pub format: FormatArg,
    pub path: PathBuf,
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// 2 for numerical failures, 1 for everything else.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<crate::Error>() {
        Some(inner) if inner.is_numerical() => 2,
        _ => 1,
    }
}

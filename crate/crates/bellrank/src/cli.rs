//! Command-line arguments. Every subcommand's arguments are echoed verbatim
//! into the report manifest.

use std::path::PathBuf;

use bellrank_core::chsh::SignConvention;
use bellrank_core::simulators::SessionPolicy;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

#[derive(Debug, Parser)]
#[command(name = "bellrank", version, about = "CHSH analysis and rank-frequency model selection")]
pub struct Cli {
    /// Directory for reports and sidecar files.
    #[arg(long, global = true, env = "BELLRANK_OUT_DIR", default_value = "bellrank-out")]
    pub out_dir: PathBuf,
    /// Do not echo the report JSON to stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CHSH report, bootstrap intervals and optional tests from counts or trials.
    Chsh(ChshArgs),
    /// Fit rank-frequency families and rank them by AIC.
    Fit(FitArgs),
    /// Sample counts from a ground-truth behavior.
    Simulate(SimulateArgs),
    /// Tokenize text and write rank tables.
    Corpus(CorpusArgs),
}

/// `all` or one sign pattern such as `+++-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionChoice {
    All,
    One(SignConvention),
}

impl ConventionChoice {
    pub fn conventions(self) -> Vec<SignConvention> {
        match self {
            ConventionChoice::All => SignConvention::ALL.to_vec(),
            ConventionChoice::One(c) => vec![c],
        }
    }
}

impl Serialize for ConventionChoice {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ConventionChoice::All => s.serialize_str("all"),
            ConventionChoice::One(c) => s.serialize_str(&c.to_string()),
        }
    }
}

fn parse_convention(s: &str) -> Result<ConventionChoice, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(ConventionChoice::All);
    }
    SignConvention::parse(s)
        .map(ConventionChoice::One)
        .ok_or_else(|| format!("`{s}` is not `all` or a sign pattern with one or three minus signs"))
}

fn parse_unit_open(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Auto,
    Counts,
    Trials,
}

#[derive(Debug, Args, Serialize)]
pub struct ChshArgs {
    /// Counts CSV (`x,y,a,b,count`) or trials CSV (`participant_id,x,y,a,b`).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// Outcomes are 0/1 bits rather than +1/-1.
    #[arg(long)]
    pub bit_outcomes: bool,
    /// Convention(s) for intervals and tests.
    #[arg(long, default_value = "all", value_parser = parse_convention, allow_hyphen_values = true)]
    pub convention: ConventionChoice,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bootstrap resamples (at least 100).
    #[arg(long, default_value_t = 2000)]
    pub resamples: usize,
    #[arg(long, default_value_t = 0.95, value_parser = parse_unit_open)]
    pub level: f64,
    /// Also report the naive per-participant t-test (trials input only).
    #[arg(long)]
    pub t_test: bool,
    /// Null value for the naive t-test.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub null_value: f64,
    /// Permutations for the setting-label permutation test (trials input only; 0 skips).
    #[arg(long, default_value_t = 0)]
    pub permutations: usize,
    /// Search for a local decomposition within this max-norm tolerance.
    #[arg(long)]
    pub local_tolerance: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub case_fold: bool,
    /// Strip leading and trailing non-alphanumeric characters from tokens.
    #[arg(long)]
    pub strip_punctuation: bool,
    /// File of whitespace-separated stopwords.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub min_token_length: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Rank table CSV (`rank,count` or `token,count`), or text with `--raw-text`.
    pub input: PathBuf,
    /// Treat the input as plain text and run the corpus pipeline first.
    #[arg(long)]
    pub raw_text: bool,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
    /// Comma-separated families, or `all`.
    #[arg(long, default_value = "all")]
    pub families: String,
    /// Support size V (defaults to the largest observed rank).
    #[arg(long)]
    pub support: Option<u64>,
    /// Fraction of occurrences held out for out-of-sample log-likelihood.
    #[arg(long, value_parser = parse_unit_open)]
    pub holdout: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub starts_per_dim: usize,
    #[arg(long, default_value_t = 3)]
    pub local_searches: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    PerTrial,
    PerBlock,
    Never,
}

impl From<PolicyArg> for SessionPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::PerTrial => SessionPolicy::PerTrial,
            PolicyArg::PerBlock => SessionPolicy::PerBlock,
            PolicyArg::Never => SessionPolicy::Never,
        }
    }
}

impl Serialize for PolicyArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SessionPolicy::from(*self).serialize(s)
    }
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("scenario").required(true).args(["pr_box", "singlet", "lhv"])))]
pub struct SimulateArgs {
    /// PR box (bit(a) xor bit(b) = x·y).
    #[arg(long)]
    pub pr_box: bool,
    /// Singlet with measurement angles A0 A1 B0 B1 in radians.
    #[arg(long, num_args = 4, value_names = ["A0", "A1", "B0", "B1"], allow_negative_numbers = true)]
    pub singlet: Option<Vec<f64>>,
    /// Sixteen comma-separated weights over deterministic strategies.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub lhv: Option<Vec<f64>>,
    /// Mix the behavior with white noise: v·P + (1 − v)·uniform.
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    /// Trials per setting block (total trials with `--protocol`).
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run the randomized-settings protocol with shared-strategy responders (`--lhv` only).
    #[arg(long, requires = "lhv")]
    pub protocol: bool,
    #[arg(long, value_enum, default_value_t = PolicyArg::PerTrial)]
    pub session_policy: PolicyArg,
}

#[derive(Debug, Args, Serialize)]
pub struct CorpusArgs {
    /// UTF-8 text files, concatenated in the given order.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
}

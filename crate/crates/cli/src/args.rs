use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use splitlr::diagnostics::NullStatistic;
use splitlr::{CaseId, ThresholdRule};

use crate::render::Format;

#[derive(Debug, Parser)]
#[command(name = "splitlr", version, about = "Likelihood ratio and split likelihood ratio tests for Gaussian mixtures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test homogeneity of a data file.
    Test(TestArgs),
    /// Monte Carlo size and power study.
    Simulate(SimulateArgs),
    /// Simulate the null distribution of a statistic.
    Nulldist(NullArgs),
    /// Print the rejection thresholds.
    Thresholds(ThresholdArgs),
    /// Empirical-process and location diagnostics.
    #[command(subcommand)]
    Diagnose(DiagnoseCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Contaminated,
    TwoMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Lrt,
    Slrt,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// One number per line; `-` reads standard input.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Model::Contaminated)]
    pub model: Model,
    #[arg(long, value_enum, default_value_t = Method::Lrt)]
    pub method: Method,
    /// Fraction of the sample in the evaluation half.
    #[arg(long, default_value_t = 0.5)]
    pub m0: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// universal, asymptotic_lrt or asymptotic_slrt; defaults to
    /// asymptotic_lrt for LRT and universal for SLRT.
    #[arg(long)]
    pub rule: Option<ThresholdRule>,
    /// Shuffle before splitting, with this seed.
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
    /// EM starting points (two-mean model).
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Seed for the random EM starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file with `case`, `gamma`, `n`, `reps`, `seed` keys; flags
    /// given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// i, ii, iii, iv, v or contig.
    #[arg(long)]
    pub case: Option<CaseId>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub gamma: Option<Vec<f64>>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: Option<u64>,
    /// Split fractions; each adds SLRT with both split thresholds.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub m0: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Location of the contaminating component (contig case).
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub em_restarts: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Case iii defaults to 200 replications; this restores 1000.
    #[arg(long)]
    pub full: bool,
    /// Compare against the bundled reference tables; exits 1 if any cell
    /// is outside its band.
    #[arg(long)]
    pub compare: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct NullArgs {
    /// lrt, supremum or split.
    #[arg(long)]
    pub statistic: NullStatistic,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub m0: f64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Where to write the per-replication draws as CSV.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [0.4, 0.5, 0.6])]
    pub m0: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum DiagnoseCommand {
    /// Supremum of the empirical process for a data file.
    Process(ProcessArgs),
    /// Spread of the split-sample location estimate under the null.
    Uniformity(UniformityArgs),
}

#[derive(Debug, Args)]
pub struct ProcessArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Where to write the process on its scan grid as CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct UniformityArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub m0: f64,
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Use `[lower, upper]` instead of the default interval.
    #[arg(long, requires = "upper")]
    pub lower: Option<f64>,
    #[arg(long, requires = "lower")]
    pub upper: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
}

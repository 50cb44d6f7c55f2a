use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gini_jel::inference::{Grid, Method, Target};

#[derive(Debug, Parser)]
#[command(
    name = "gini-jel",
    version,
    about = "Jackknife empirical likelihood inference for Gini correlations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimates of both Gini correlations, their difference and Pearson's r.
    Estimate(DataArgs),
    /// Confidence interval for one target.
    Ci(CiArgs),
    /// Equality test within one sample, or joint two-sample test.
    Test(TestArgs),
    /// Run a Monte Carlo study described by a TOML file.
    Simulate(SimulateArgs),
    /// Joint confidence region of the two-sample differences on a grid (CSV).
    Region(RegionArgs),
    /// Draw a sample from a parametric family and write it as CSV.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Comma-separated `(x, y)` columns with an optional header.
    TwoColumn,
    /// Five columns `vw, sw, kw, ei, class` with class 0 genuine, 1 forgery.
    Banknote,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input CSV file.
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "two-column")]
    pub format: Format,
    /// Columns as `i,j`: 0-based indices or header names; banknote also
    /// accepts vw, sw, kw, ei.
    #[arg(long)]
    pub cols: Option<String>,
    /// Banknote class: genuine (0) or forgery (1).
    #[arg(long, default_value = "genuine")]
    pub class: String,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_parser = parse_target, default_value = "gamma_xy")]
    pub target: Target,
    /// jel, ajel, jackknife, asymptotic or pearson.
    #[arg(long, value_parser = parse_method, default_value = "jel")]
    pub method: Method,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Use the adjusted JEL (same as `--method ajel`).
    #[arg(long)]
    pub adjusted: bool,
    /// Asymptotic variance for the asymptotic or pearson methods.
    #[arg(long)]
    pub variance: Option<f64>,
    /// Parametric family for the asymptotic variance: normal, t:DF or
    /// normal_lognormal.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Outer Monte Carlo size when the variance is simulated.
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestMode {
    Equality,
    #[value(alias = "two_sample")]
    TwoSample,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(value_enum)]
    pub mode: TestMode,
    #[command(flatten)]
    pub data: DataArgs,
    /// Second sample (two_sample). A banknote file alone compares genuine
    /// against forgery.
    #[arg(long)]
    pub file2: Option<PathBuf>,
    /// Adds the decision at `alpha = 1 - level` to the reported ones.
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub adjusted: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Study configuration (TOML).
    pub config: PathBuf,
    /// Directory receiving report.json and report.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configured replications per repeat.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Overrides the configured number of repeats.
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub file2: Option<PathBuf>,
    #[arg(long, default_value_t = 0.90)]
    pub level: f64,
    /// `x0:x1:y0:y1:res` over `(delta1, delta2)`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Grid,
    #[arg(long)]
    pub adjusted: bool,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// normal, t:DF or normal_lognormal.
    #[arg(long, default_value = "normal")]
    pub family: String,
    /// Correlation of a unit-variance scatter; ignored when --scatter is set.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Scatter matrix entries `s11,s12,s22`.
    #[arg(long)]
    pub scatter: Option<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse().map_err(|e: gini_jel::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: gini_jel::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse().map_err(|e: gini_jel::Error| e.to_string())
}

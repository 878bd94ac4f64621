//! Command-line surface. Every option is captured as a raw string so that
//! flag values and config-file values go through one parsing path.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "confband",
    version,
    about = "Kernel density confidence bands: estimation, band construction, \
             rate-condition checking, and coverage simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Evaluate a kernel density estimate on a grid and export it as CSV.
    Kde(KdeArgs),
    /// Construct a confidence band from a sample and export it as CSV.
    Band(BandArgs),
    /// Check the asymptotic rate conditions for a schedule.
    #[command(name = "check-conditions")]
    CheckConditions(CheckArgs),
    /// Estimate band non-coverage probabilities by seeded Monte Carlo.
    Simulate(SimulateArgs),
}

/// Rate schedule options shared by band, check-conditions, and simulate:
/// either a named preset with its parameters, or four explicit rates in the
/// grammar `c*n^p*log^q*loglog^r`.
#[derive(Args, Default)]
pub struct ScheduleArgs {
    /// Preset name: bickel_rosenblatt | translated | thinner_mse | thinner_sup
    #[arg(long)]
    pub preset: Option<String>,
    /// Bandwidth exponent parameter of the preset
    #[arg(long)]
    pub a: Option<String>,
    /// Truncation exponent parameter of the preset
    #[arg(long)]
    pub e: Option<String>,
    /// Leading constant of h* (thinner presets)
    #[arg(long)]
    pub cstar: Option<String>,
    /// Leading constant of v (thinner presets)
    #[arg(long)]
    pub vstar: Option<String>,
    /// Optional constant selecting h = hc*[n/log n]^{-1/(d+4)} (thinner_mse)
    #[arg(long)]
    pub hc: Option<String>,
    /// Explicit rate for the variance bandwidth h
    #[arg(long)]
    pub h: Option<String>,
    /// Explicit rate for the center bandwidth h*
    #[arg(long)]
    pub hstar: Option<String>,
    /// Explicit rate for the width normalization v
    #[arg(long)]
    pub v: Option<String>,
    /// Explicit rate for the truncation level eps
    #[arg(long)]
    pub eps: Option<String>,
}

#[derive(Args)]
pub struct KdeArgs {
    /// Sample CSV: one observation per row, numeric columns
    #[arg(long)]
    pub input: Option<String>,
    /// Kernel identifier (gaussian | epanechnikov | biweight | uniform |
    /// product:k1,k2,...)
    #[arg(long)]
    pub kernel: Option<String>,
    /// Numeric bandwidth
    #[arg(long)]
    pub h: Option<String>,
    /// Grid region, per-axis lo:hi separated by commas
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Grid spacing, one value per axis (single value replicates)
    #[arg(long)]
    pub spacing: Option<String>,
    /// Output CSV path
    #[arg(long)]
    pub out: Option<String>,
    /// Flat key=value config file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct BandArgs {
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub kernel: Option<String>,
    /// Band family: hat | check | br | translated | simplified | truncated
    #[arg(long)]
    pub family: Option<String>,
    /// Width multiplier for the delta-parameterized families
    #[arg(long)]
    pub delta: Option<String>,
    /// Level parameter for the br and translated families
    #[arg(long)]
    pub alpha: Option<String>,
    /// Truncation mode: none | tilde | sup
    #[arg(long)]
    pub trunc: Option<String>,
    /// Interval c1,c2 entering the classical normalization (defaults to the
    /// grid bounds)
    #[arg(long, allow_hyphen_values = true)]
    pub cbounds: Option<String>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    #[arg(long)]
    pub spacing: Option<String>,
    /// Output CSV path for the band
    #[arg(long)]
    pub out: Option<String>,
    /// Summary JSON path (stdout when omitted)
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct CheckArgs {
    /// Dimension (default 1)
    #[arg(long)]
    pub d: Option<String>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Report JSON path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Density name: gaussian | bimodal | `beta_smooth[:lo,hi]` | bump |
    /// `mixture:w,mean,sd;...`
    #[arg(long)]
    pub density: Option<String>,
    /// Dimension (default 1)
    #[arg(long)]
    pub d: Option<String>,
    /// Kernel identifier (default epanechnikov)
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub trunc: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub cbounds: Option<String>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Comma-separated increasing sample sizes
    #[arg(long)]
    pub n: Option<String>,
    /// Replications per sample size
    #[arg(long)]
    pub reps: Option<String>,
    /// Master seed (default 0)
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    #[arg(long)]
    pub spacing: Option<String>,
    /// Zero-miss handling in the log-level fit: none | half (default half)
    #[arg(long)]
    pub correction: Option<String>,
    /// Report JSON path
    #[arg(long)]
    pub out: Option<String>,
    /// Optional CSV of log phat against the speed w_n
    #[arg(long)]
    pub plot_csv: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "disttrans",
    version,
    about = "Tests whether one distribution is a parametric transformation of another"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-sample test: is Y a transformation of X?
    Test(TestArgs),
    /// K-sample test against one base sample.
    Ktest(KtestArgs),
    /// Warp-speed Monte Carlo rejection-rate table.
    Simulate(SimulateArgs),
    /// Write one simulated data set as CSV.
    Gen(GenArgs),
}

/// Settings common to `test` and `ktest`.
#[derive(Debug, Args, Default)]
pub struct TestingArgs {
    /// Comma-separated tau values.
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n_boot: Option<usize>,
    #[arg(long)]
    pub m_nodes: Option<usize>,
    /// Lattice points per parameter dimension (one value or one per dimension).
    #[arg(long, value_delimiter = ',')]
    pub resolution: Option<Vec<usize>>,
    /// Polish the lattice minimizer with a compass search.
    #[arg(long)]
    pub refine: bool,
    /// `auto`, or `MEAN,SD` for a normal measure.
    #[arg(long)]
    pub nu: Option<String>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub testing: TestingArgs,
    /// CSV holding the X sample.
    #[arg(long)]
    pub x: Option<PathBuf>,
    #[arg(long)]
    pub x_column: Option<String>,
    /// CSV holding the Y sample.
    #[arg(long)]
    pub y: Option<PathBuf>,
    #[arg(long)]
    pub y_column: Option<String>,
    /// CSV holding matched pairs (columns named by --x-column and --y-column).
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// `independent` or `matched`.
    #[arg(long)]
    pub pairing: Option<String>,
    /// `location`, `scale` or `location-scale`.
    #[arg(long)]
    pub family: Option<String>,
    /// Lower corner of the parameter box, comma-separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lower: Option<Vec<f64>>,
    /// Upper corner of the parameter box, comma-separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub upper: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct KtestArgs {
    #[command(flatten)]
    pub testing: TestingArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n_mc: Option<usize>,
    #[arg(long)]
    pub m_nodes: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub resolution: Option<Vec<usize>>,
    /// `continuous` or `discrete`.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub pairing: Option<String>,
    /// Comma-separated DGP ids (0 to 3).
    #[arg(long, value_delimiter = ',')]
    pub dgps: Option<Vec<u8>>,
    /// Sample sizes as `N1xN2`, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub dgp: Option<u8>,
    #[arg(long)]
    pub pairing: Option<String>,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
}

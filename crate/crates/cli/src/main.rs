mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "slra", version, about = "Sparse low-rank approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance and write it to a directory.
    Gen(GenArgs),
    /// Sparse spectral low-rank approximation of a matrix file.
    SparseSvd(SvdArgs),
    /// Run a streaming algorithm over a matrix or update-stream file.
    Stream(StreamArgs),
    /// Sparse-signal detection in a Gaussian matrix.
    Detect(DetectArgs),
    /// Sparse-signal estimation from Gaussian measurements.
    Estimate(EstimateArgs),
    /// Seeded multi-trial sweeps, reported as JSON or CSV tables.
    Bench(BenchArgs),
    /// Calibrate a detection threshold on null instances.
    Calibrate(CalibrateArgs),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Seed for every random choice; required.
    #[arg(long)]
    pub seed: u64,
    /// Report destination (stdout when absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// `λ·X + G` with Gaussian noise (a null matrix without `--planted`).
    Gaussian,
    /// Disjoint sparse blocks plus small Gaussian noise.
    Block,
    /// Sparse singular vectors over a residual with unit spectral norm.
    Spectral,
}

#[derive(Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = GenKind::Gaussian)]
    pub kind: GenKind,
    /// Plant a signal (gaussian kind only; the other kinds always do).
    #[arg(long)]
    pub planted: bool,
    #[arg(long)]
    pub n: usize,
    /// Column count for block and spectral kinds (defaults to `n`).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Signal strength for the gaussian kind (defaults to `√n`).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated block weights for the block kind.
    #[arg(long, value_delimiter = ',', default_value = "3.0")]
    pub taus: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// `σ_k/σ_{k+1}` for the spectral kind.
    #[arg(long, default_value_t = 1.05)]
    pub gap: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub binary: bool,
}

#[derive(Args)]
pub struct SvdArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub eps: f64,
    /// Constant in the power-iteration degree.
    #[arg(long)]
    pub c: Option<f64>,
    /// Compare against an exact SVD of the input.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub factor_out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Net,
    Rel,
    Add,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Submatrix,
    PerComponent,
    /// Smaller cost of the two exact variants.
    Best,
}

#[derive(Args)]
pub struct StreamArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    /// Matrix file (text or binary); converted to one update per nonzero.
    #[arg(long, conflicts_with = "updates")]
    pub input: Option<PathBuf>,
    /// Update-stream file `i j delta` per line; needs `--n` and `--d`.
    #[arg(long, requires_all = ["n", "d"])]
    pub updates: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub eps: f64,
    /// Ingest through this many contexts and merge them.
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
    /// Compare against a brute-force oracle (needs the full matrix).
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, value_enum, default_value_t = OracleArg::Submatrix)]
    pub oracle_variant: OracleArg,
    #[arg(long)]
    pub factor_out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Small,
    LargeFrob,
    SmallFrob,
}

#[derive(Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Force a regime instead of choosing from `(n, s, k)`.
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub small_z: Option<f64>,
    #[arg(long)]
    pub large_z: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Explicit,
    Simulated,
}

#[derive(Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = BackendArg::Simulated)]
    pub backend: BackendArg,
    #[arg(long, default_value_t = 4.0)]
    pub c: f64,
    /// Planted factor file to report `‖X − X′‖₂` against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub factor_out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchTask {
    /// Sparse spectral LRA on planted spectral instances.
    Spectral,
    /// A streaming algorithm on planted blocks, against the oracle.
    Stream,
    /// Detection on null and planted Gaussian pairs.
    Detect,
    /// Estimation on planted Gaussian instances.
    Estimate,
    /// Measurement-ledger totals over a grid of `s` and `k`.
    Ledger,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub task: BenchTask,
    #[arg(long, default_value_t = 10)]
    pub trials: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub s: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = AlgoArg::Rel)]
    pub algo: AlgoArg,
    #[arg(long, value_enum, default_value_t = OracleArg::Submatrix)]
    pub oracle_variant: OracleArg,
    #[arg(long, default_value_t = 1.05)]
    pub gap: f64,
    #[arg(long, value_delimiter = ',', default_value = "5.0")]
    pub taus: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
}

#[derive(Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub regime: CalibrateRegime,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    #[arg(long, default_value_t = 0.1)]
    pub fpr: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum CalibrateRegime {
    Small,
    Large,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::SparseSvd(a) => commands::sparse_svd(a),
        Command::Stream(a) => commands::stream(a),
        Command::Detect(a) => commands::detect(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Bench(a) => commands::bench(a),
        Command::Calibrate(a) => commands::calibrate(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

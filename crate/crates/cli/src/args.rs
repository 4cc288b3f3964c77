use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use krylov_core::ReorthMode;

#[derive(Debug, Parser)]
#[command(name = "krylov", version, about = "Krylov complexity, Lanczos coefficients and the dispersion bound")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form model: complexity profile, or its Lanczos coefficients with --coefficients.
    Model(ModelArgs),
    /// Lanczos coefficients of a Hamiltonian and observable read from JSON matrix files.
    Lanczos(LanczosArgs),
    /// Amplitudes phi_n(t) of a coefficient chain.
    Evolve(EvolveArgs),
    /// Complexity, growth rate, dispersion bound and saturation ratio of a chain.
    Bound(EvolveArgs),
    /// Closure test of the complexity algebra on a coefficient sequence.
    Closure(ClosureArgs),
    /// GOE ensemble with the uniform initial observable.
    Goe(GoeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reorth {
    None,
    Full,
    Partial,
}

impl From<Reorth> for ReorthMode {
    fn from(r: Reorth) -> Self {
        match r {
            Reorth::None => ReorthMode::None,
            Reorth::Full => ReorthMode::Full,
            Reorth::Partial => ReorthMode::Partial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Eigen,
    Rk4,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 5.0)]
    pub tmax: f64,
    /// Number of grid points on [0, tmax].
    #[arg(long, default_value_t = 201)]
    pub steps: usize,
}

/// Where the coefficient chain comes from.
#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Comma-separated b_1,b_2,...
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "input")]
    pub b: Option<Vec<f64>>,
    /// JSON (list, Lanczos result, model coefficients or ensemble) or CSV with a `b_n` column.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Realization index when the input is an ensemble.
    #[arg(long)]
    pub realization: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// su2:j=..,nu=.. | hw:nu=.. | syk:eta=..,nu=.. | sat:alpha=..,gamma=..[,D=..]
    pub spec: String,
    /// Emit b_1..b_N instead of the profile.
    #[arg(long, value_name = "N")]
    pub coefficients: Option<usize>,
    /// Amplitudes kept for infinite models; grown automatically when omitted.
    #[arg(long)]
    pub truncation: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LanczosArgs {
    /// Hamiltonian matrix file `{"dim", "re", "im"}`.
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// Observable matrix file.
    #[arg(long, conflicts_with = "uniform", required_unless_present = "uniform")]
    pub observable: Option<PathBuf>,
    /// Start from (1/d, ..., 1/d) in the Liouvillian eigenbasis.
    #[arg(long)]
    pub uniform: bool,
    /// Inverse temperature of the inner product.
    #[arg(long, default_value_t = 0.0, conflicts_with = "uniform")]
    pub beta: f64,
    #[command(flatten)]
    pub lanczos: LanczosFlags,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LanczosFlags {
    /// Default: full for d^2 <= 4096, partial above.
    #[arg(long, value_enum)]
    pub reorth: Option<Reorth>,
    /// Partial reorthogonalization threshold; default sqrt(eps).
    #[arg(long)]
    pub reorth_threshold: Option<f64>,
    /// Halt when |A_n+1| <= tol-halt * b_1.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_halt: f64,
    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, value_enum, default_value_t = Method::Eigen)]
    pub method: Method,
    /// Largest rk4 step; default 0.005 / (2 max b).
    #[arg(long)]
    pub rk4_step: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClosureArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Krylov dimension (integer or `inf`); taken from the input when omitted.
    #[arg(long)]
    pub dim: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_closure: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GoeArgs {
    /// Hilbert-space dimension.
    #[arg(long, default_value_t = 32)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub lanczos: LanczosFlags,
    /// Evolve every realization on [0, tmax] (steps points).
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub steps: usize,
    /// Grid size for the per-realization ratio summary on [0, 5 tau_d].
    #[arg(long)]
    pub deviation_samples: Option<usize>,
    /// Re-emit tables from a saved ensemble JSON instead of sampling.
    #[arg(long)]
    pub from: Option<PathBuf>,
    /// CSV: coefficients of this realization instead of the ensemble summary.
    #[arg(long)]
    pub realization: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

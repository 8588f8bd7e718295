use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "vhj", version, about = "Viscous Hamilton-Jacobi laboratory: spectra, kernels, solvers, rates, braids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constants of the singular steady state U and samples of U, U_a.
    Steady(SteadyArgs),
    /// Eigenvalues, coefficients and zeros of the linearized operator.
    Spectrum(SpectrumArgs),
    /// Heat-kernel normalization and semigroup eigen-action checks.
    Kernel(KernelArgs),
    /// Classical or truncated run from a config file.
    Solve(SolveArgs),
    /// Run of the problem linearized around U (recovery of the boundary condition).
    SolveSingular(SolveArgs),
    /// Track intersections with U across snapshot CSVs.
    Zeros(ZerosArgs),
    /// Power-law fit of a trace CSV.
    RateFit(RateFitArgs),
    /// Rescaled-profile misfit of singular-run snapshots against φ_n.
    ProfileCheck(ProfileArgs),
    /// Positive braid monoid on three strands.
    Braid {
        #[command(subcommand)]
        op: BraidOp,
    },
    /// Rerun a named experiment.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SteadyArgs {
    #[arg(long, default_value = "3")]
    pub p: String,
    /// Shift of the regular steady state U_a.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// CSV with columns x,U[,U_a,U_a'].
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, default_value = "3")]
    pub p: String,
    #[arg(long, default_value_t = 5)]
    pub jmax: usize,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    /// Weight exponent; derived from --p when absent.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value = "3")]
    pub p: String,
    /// ∫H₀ξ^α dξ on a 5×5 grid of (t, x) ∈ [0.1, 5] × [0, 10].
    #[arg(long)]
    pub check_normalization: bool,
    /// Compare e^{-sL}φ_j with e^{-λ_j s}φ_j on y ∈ [0, 6].
    #[arg(long, num_args = 2, value_names = ["J", "S"])]
    pub eigen_test: Option<Vec<String>>,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to vhj-out/<manifest id>.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Overrides [params] p.
    #[arg(long)]
    pub p: Option<String>,
    /// Overrides [params] truncation (solve only).
    #[arg(long)]
    pub truncation: Option<f64>,
    /// Overrides [params] a (solve-singular only).
    #[arg(long)]
    pub a: Option<f64>,
    /// Overrides [grid] ratio.
    #[arg(long)]
    pub grid_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum Reference {
    /// Columns are u; intersections with U.
    Steady,
    /// Columns are u - U already; intersections with 0.
    Zero,
    /// Steady for header x,u and zero for header x,z.
    Auto,
}

#[derive(Debug, Args, Serialize)]
pub struct ZerosArgs {
    /// Directory of snapshot CSVs named t=<time>.csv.
    #[arg(long)]
    pub snapshots: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "3")]
    pub p: String,
    #[arg(long, value_enum, default_value_t = Reference::Auto)]
    pub reference: Reference,
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub interval: Option<Vec<f64>>,
    /// Singular time; enables the vanishing-intersection count.
    #[arg(long)]
    pub t_sing: Option<f64>,
    /// Length of the terminal window for the vanishing count.
    #[arg(long)]
    pub span: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct RateFitArgs {
    /// CSV with columns t,value.
    #[arg(long)]
    pub trace: PathBuf,
    /// Known singular time; fitted when absent.
    #[arg(long)]
    pub t_sing: Option<f64>,
    /// Keep points with T - t in [LO, HI].
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub gap: Option<Vec<f64>>,
    /// Gradient-trace check for n vanishing intersections instead of a plain fit.
    #[arg(long)]
    pub gbu_n: Option<usize>,
    /// Window of slope values for --gbu-n.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [10.0, 500.0])]
    pub m_range: Vec<f64>,
    #[arg(long, default_value = "3")]
    pub p: String,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    /// Directory of singular-run snapshots (header x,z).
    #[arg(long)]
    pub snapshots: PathBuf,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value = "3")]
    pub p: String,
    #[arg(long, default_value_t = 2.0)]
    pub y_max: f64,
    /// Snapshots closer than this to τ are counted as degenerate.
    #[arg(long, default_value_t = 0.0)]
    pub min_gap: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BraidOp {
    /// Artin equivalence of two words over {X, Y}.
    Equiv {
        w1: String,
        w2: String,
        #[arg(long, default_value_t = 24)]
        bound: usize,
    },
    /// Whether A reduces to B by simple parabolic reductions; emits a certificate.
    Reduce {
        a: String,
        b: String,
        #[arg(long, default_value_t = 24)]
        bound: usize,
    },
    /// Certify the identities and the non-reduction lemmas up to n.
    Verify {
        #[arg(long, default_value_t = 5)]
        nmax: usize,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        /// Longest A in the commutation identity.
        #[arg(long, default_value_t = 6)]
        a_len: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Braid word of three curves given as CSV columns x,c1,c2,c3.
    Encode {
        curves: PathBuf,
        #[arg(long, value_enum, default_value_t = Order::BottomX)]
        order: Order,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 1e-9)]
        slope_tol: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum Order {
    BottomX,
    BottomY,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum Experiment {
    Acceptance,
}

#[derive(Debug, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

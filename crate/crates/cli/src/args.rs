use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use spirallab::spec;

#[derive(Debug, Parser)]
#[command(
    name = "spirallab",
    version,
    about = "Sampled verification of covering bounds, Roper-Suffridge/Muir extensions and semigroup generators",
    after_help = "Reports are JSON with \"schema\": \"spirallab/1\"; complex numbers are [re, im]. \
                  Exit status: 0 pass, 1 verified failure, 2 usage or input error. \
                  SPIRALLAB_THREADS sets the worker thread count."
)]
pub struct Cli {
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Covered disk of h(Omega_alpha) around h(x0), or around beta h(x0).
    Covering(CoveringArgs),
    /// Koenigs function of a generator, sampled on a polar grid.
    Koenigs(KoenigsArgs),
    /// Integrate dz/dt = -f(z).
    Flow(FlowArgs),
    /// Spirallike margin of a map, or Berkson-Porta margin of a generator.
    SpiralCheck(SpiralCheckArgs),
    /// Invariance of the Roper-Suffridge/Muir image of the ball.
    Extend(ExtendArgs),
    /// The ratio f(t) of the perturbation bound and its infimum.
    SharpBound(SharpArgs),
    /// Extension of a disk generator to the ball.
    GenExtend(GenExtendArgs),
}

/// Comma-separated reals.
#[derive(Debug, Clone)]
pub struct RealList(pub Vec<f64>);

pub fn complex_arg(s: &str) -> Result<Complex64, String> {
    spec::parse_complex(s).map_err(|e| e.to_string())
}

pub fn list_arg(s: &str) -> Result<RealList, String> {
    spec::parse_real_list(s).map(RealList).map_err(|e| e.to_string())
}

pub fn grid_arg(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = spec::parse_grid(s).map_err(|e| e.to_string())?;
    if a.saturating_mul(b) > 100_000_000 {
        return Err(format!("grid {a}x{b} exceeds 1e8 points"));
    }
    Ok((a, b))
}

#[derive(Debug, Args)]
pub struct CoveringArgs {
    /// Map: a built-in name, inline JSON, or a path to a JSON file.
    #[arg(long = "fn")]
    pub function: String,
    /// Base point(s) x0 as re,im; repeat for a sweep.
    #[arg(long = "x0", value_parser = complex_arg, allow_hyphen_values = true)]
    pub x0: Vec<Complex64>,
    /// alpha value(s), comma separated.
    #[arg(long, value_parser = list_arg)]
    pub alpha: Option<RealList>,
    /// Scale factor beta; selects the scaled covering check.
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, conflicts_with = "times")]
    pub beta: Option<Complex64>,
    /// Times t giving beta = exp(-mu t); selects the scaled covering check.
    #[arg(long, value_parser = list_arg)]
    pub times: Option<RealList>,
    /// Spiral multiplier for --times (default: the map's own).
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub mu: Option<Complex64>,
    /// Scaled check: alpha = ratio |beta| when --alpha is absent.
    #[arg(long, default_value_t = 0.5)]
    pub alpha_ratio: f64,
    /// Polar grid radial,angular sizes.
    #[arg(long, value_parser = grid_arg, default_value = "400,400")]
    pub grid: (usize, usize),
    /// Also run the Koebe distortion oracle at this many random (x0, z) pairs.
    #[arg(long, default_value_t = 0)]
    pub distortion: usize,
    /// CSV of the first case: x_re,x_im,in_omega (0/1) per grid point.
    #[arg(long)]
    pub dump_region: Option<PathBuf>,
    /// JSON report path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KoenigsArgs {
    /// Generator: a built-in name, inline JSON, or a path to a JSON file.
    #[arg(long = "gen")]
    pub generator: String,
    /// Sample grid radial[,angular].
    #[arg(long, value_parser = grid_arg, default_value = "40,80")]
    pub grid: (usize, usize),
    /// Outer radius of the sample grid.
    #[arg(long, default_value_t = 0.9)]
    pub rmax: f64,
    /// Closed-form map to compare with.
    #[arg(long)]
    pub reference: Option<String>,
    /// Times for the Schroeder residual.
    #[arg(long, value_parser = list_arg, default_value = "0.25,1,3")]
    pub times: RealList,
    /// Random samples for the Schroeder residual.
    #[arg(long, default_value_t = 500)]
    pub schroder_samples: usize,
    /// CSV: x_re,x_im,h_re,h_im,dh_re,dh_im per grid point.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report path (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long = "gen")]
    pub generator: String,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub z0: Complex64,
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpiralCheckArgs {
    #[arg(long = "fn", conflicts_with = "generator", required_unless_present = "generator")]
    pub function: Option<String>,
    #[arg(long = "gen")]
    pub generator: Option<String>,
    /// Multiplier for the map check (default: the map's own).
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub mu: Option<Complex64>,
    /// Boundary-concentrated grid radial,angular.
    #[arg(long, value_parser = grid_arg, default_value = "48,96")]
    pub grid: (usize, usize),
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Muir,
    Gamma,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    /// Dimension of the fiber (default: taken from Q, else 1).
    #[arg(long)]
    pub m: Option<usize>,
    /// Homogeneous polynomial Q as inline JSON or a path.
    #[arg(long = "Q")]
    pub q: Option<String>,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, default_value = "1,0")]
    pub mu: Complex64,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, default_value = "1,0")]
    pub lambda: Complex64,
    /// Fiber norm: euclidean, sup, or p:<p>.
    #[arg(long, default_value = "euclidean")]
    pub y_norm: String,
    /// Check mode (default: muir with --Q, gamma without).
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, value_parser = list_arg, default_value = "0.1,0.5,1,2,5")]
    pub times: RealList,
    /// Gamma directions per sample and time.
    #[arg(long, default_value_t = 16)]
    pub directions: usize,
    /// Gamma radius as a fraction of R_t.
    #[arg(long, default_value_t = 0.999)]
    pub gamma_fraction: f64,
    /// Quasi-random sphere points for the sup of |Q|.
    #[arg(long, default_value_t = 100_000)]
    pub sup_samples: usize,
    /// Samples for the algebraic identity checks (0 to skip).
    #[arg(long, default_value_t = 1000)]
    pub identities: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SharpArgs {
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub lambda: Complex64,
    #[arg(long)]
    pub r: u32,
    #[arg(long)]
    pub tmax: Option<f64>,
    /// CSV: t,f,margin on a log grid.
    #[arg(long)]
    pub dump_curve: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub curve_points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenExtendArgs {
    #[arg(long = "gen")]
    pub generator: String,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true, default_value = "1,0")]
    pub lambda: Complex64,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "Q")]
    pub q: Option<String>,
    /// Interior samples for the conjugation and inverse checks.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Random starts for the ball flow.
    #[arg(long, default_value_t = 100)]
    pub starts: usize,
    #[arg(long = "T", default_value_t = 5.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// CSV: start,t,x_re,x_im,y1_re,y1_im,... per trajectory sample.
    #[arg(long)]
    pub dump_traj: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

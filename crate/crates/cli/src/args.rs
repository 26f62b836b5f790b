use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Grid;

#[derive(Debug, Parser)]
#[command(name = "loewner", version, about = "Loewner flows, slit welding and non-commutative convolutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Loewner flow at the points x + iy of a grid.
    ///
    /// CSV columns: x,y,re,im,alive,lifetime,err_est.
    /// `forward` runs g_T from t = 0; `reverse` and `anti` run phi_{s,T}.
    Flow(FlowArgs),
    /// Generating curve gamma(t) at t = kT/steps.
    ///
    /// CSV columns: t,re,im,err_est.
    Trace(TraceArgs),
    /// Welding homeomorphism of the slit at time T.
    ///
    /// CSV columns: x,h,gap, where gap = |F(x) - F(h(x))| on the boundary.
    /// The preimage interval [a, b], the tip preimage u and the largest gap
    /// are reported on stderr.
    Welding(WeldingArgs),
    /// Cauchy and F-transforms of a convolution expression.
    ///
    /// CSV columns: z_re,z_im,g_re,g_im,f_re,f_im.
    /// Expressions combine mono(a, b), anti(a, b), free(a, b) and freer(a, b)
    /// over dirac:A, sc:V, semicircle:V, arcsine:V and bernoulli:A.
    Convolve(ConvolveArgs),
    /// Density and atoms recovered by Stieltjes inversion.
    ///
    /// CSV columns: kind,x,value with kind `density` (value = density) or
    /// `atom` (value = mass). The measure is either an expression or sigma_{s,T}
    /// of the family generated by a driver.
    Density(DensityArgs),
    /// Evolution family phi_{s,t}(z), or R_{s,t}(z) for free semantics.
    ///
    /// CSV columns: s,t,z_re,z_im,re,im with t = s + k(T - s)/steps.
    Family(FamilyArgs),
    /// Seeded SLE driving function sqrt(kappa/2) B_t.
    ///
    /// CSV columns: t,u.
    Sle(SleArgs),
    /// Burgers residual |dG/dt + G dG/dz| of G_t = 1/f_t.
    ///
    /// CSV columns: t,x,y,residual with t = kT/steps, k >= 1.
    Burgers(BurgersArgs),
    /// Runs the acceptance suite and prints one line per criterion.
    Selftest,
}

#[derive(Debug, Clone, Args)]
pub struct DriverArgs {
    /// Driver: const:U, linear:C, path:T0=U0,T1=U1,..., steps:DT:U0,U1,...,
    /// sle:KAPPA:DT:SEED, semicircle, or @FILE for a JSON run description
    #[arg(long)]
    pub driver: Option<String>,
    /// Final time
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Per-step error target of the ODE integrator
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlowMode {
    Forward,
    Reverse,
    Anti,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SemanticsArg {
    Monotone,
    Anti,
    Free,
}

#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub driver: DriverArgs,
    #[arg(long, value_enum, default_value = "forward")]
    pub mode: FlowMode,
    /// Start time s of the reverse flows
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    /// Real parts a:b:n
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    /// Imaginary parts
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub y: Vec<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub driver: DriverArgs,
    #[arg(long)]
    pub steps: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WeldingArgs {
    #[command(flatten)]
    pub driver: DriverArgs,
    /// Number of welded pairs
    #[arg(long, default_value_t = 50)]
    pub pairs: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConvolveArgs {
    #[arg(long)]
    pub expr: String,
    /// Evaluation points such as 2i or 1+0.5i (five defaults when absent)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub probe: Vec<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[arg(long, conflicts_with = "driver")]
    pub expr: Option<String>,
    #[command(flatten)]
    pub driver: DriverArgs,
    #[arg(long, value_enum, default_value = "monotone")]
    pub semantics: SemanticsArg,
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    /// Inversion grid a:b:n; must cover the support
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    /// Height of the Stieltjes inversion
    #[arg(long)]
    pub eps: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[command(flatten)]
    pub driver: DriverArgs,
    #[arg(long, value_enum, default_value = "monotone")]
    pub semantics: SemanticsArg,
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Evaluation points (five defaults when absent)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub probe: Vec<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SleArgs {
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BurgersArgs {
    #[command(flatten)]
    pub driver: DriverArgs,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Real parts a:b:n
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub y: Vec<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

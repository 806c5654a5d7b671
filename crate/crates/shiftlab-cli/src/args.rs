use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "shiftlab",
    version,
    about = "Dynamics of shift-like polynomial automorphisms: orbits, Green functions, unstable manifolds, range models",
    after_help = "A leading `--config FILE` reads `key = value` lines and passes them as `--key=value` to the subcommand."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// map description file (defaults to the built-in flagship map where allowed)
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// directory for CSV/PGM/text artifacts
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// run built-in examples for this subcommand instead of the analysis
    #[arg(long)]
    pub selftest: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate F (or F^-1) at a point
    #[command(args_override_self = true)]
    Eval(EvalArgs),
    /// Print an orbit as CSV
    #[command(args_override_self = true)]
    Orbit(OrbitArgs),
    /// Filtration region and escape tests
    #[command(args_override_self = true)]
    Filtration(FiltrationArgs),
    /// Orbit growth inequalities on sampled unstable-manifold points
    #[command(name = "thm13-verify", args_override_self = true)]
    Thm13Verify(Thm13Args),
    /// Green function G+ on a complex line through a point, as CSV and PGM
    #[command(name = "green-slice", args_override_self = true)]
    GreenSlice(GreenSliceArgs),
    /// Fixed points and their saddle type
    #[command(args_override_self = true)]
    Saddles(SaddlesArgs),
    /// Unstable manifold series at a saddle
    #[command(args_override_self = true)]
    Unstable(UnstableArgs),
    /// Order and type of u+ along the unstable manifold
    #[command(args_override_self = true)]
    Order(OrderArgs),
    /// K-tilde chart, complement components and rotation data
    #[command(args_override_self = true)]
    Ktilde(KtildeArgs),
    /// Yoccoz-type inequality for given rotation data
    #[command(args_override_self = true)]
    Yoccoz(YoccozArgs),
    /// Exact piecewise translation model
    #[command(args_override_self = true)]
    Translation(TranslationArgs),
    /// Escape and boundedness certificates for the strip model
    #[command(args_override_self = true)]
    Strips(StripsArgs),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Eval(a) => &a.common,
            Command::Orbit(a) => &a.common,
            Command::Filtration(a) => &a.common,
            Command::Thm13Verify(a) => &a.common,
            Command::GreenSlice(a) => &a.common,
            Command::Saddles(a) => &a.common,
            Command::Unstable(a) => &a.common,
            Command::Order(a) => &a.common,
            Command::Ktilde(a) => &a.common,
            Command::Yoccoz(a) => &a.common,
            Command::Translation(a) => &a.common,
            Command::Strips(a) => &a.common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Orbit(_) => "orbit",
            Command::Filtration(_) => "filtration",
            Command::Thm13Verify(_) => "thm13-verify",
            Command::GreenSlice(_) => "green-slice",
            Command::Saddles(_) => "saddles",
            Command::Unstable(_) => "unstable",
            Command::Order(_) => "order",
            Command::Ktilde(_) => "ktilde",
            Command::Yoccoz(_) => "yoccoz",
            Command::Translation(_) => "translation",
            Command::Strips(_) => "strips",
        }
    }
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// coordinates as re,im,re,im,...
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long)]
    pub inverse: bool,
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long)]
    pub backward: bool,
}

#[derive(Args, Debug)]
pub struct FiltrationArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// filtration radius R
    #[arg(long, default_value_t = 4.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 40.0)]
    pub r_escape: f64,
    #[arg(long, default_value_t = 15)]
    pub n_max: usize,
}

#[derive(Args, Debug)]
pub struct Thm13Args {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 6)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// series order for sampling the unstable manifold
    #[arg(long, default_value_t = 40)]
    pub order: usize,
    #[arg(long, default_value_t = 4.0)]
    pub radius: f64,
}

#[derive(Args, Debug)]
pub struct GreenSliceArgs {
    #[command(flatten)]
    pub common: Common,
    /// base point; the slice varies one coordinate around it
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// coordinate to vary (1-based)
    #[arg(long, default_value_t = 1)]
    pub axis: usize,
    /// half-width of the square slice
    #[arg(long, default_value_t = 4.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 128)]
    pub resolution: usize,
    #[arg(long, default_value_t = 40.0)]
    pub r_escape: f64,
    #[arg(long, default_value_t = 200)]
    pub n_max: usize,
}

#[derive(Args, Debug)]
pub struct SaddlesArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 4.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 4)]
    pub per_axis: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct UnstableArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 40)]
    pub order: usize,
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// which saddle (in the order printed by `saddles`) to use
    #[arg(long, default_value_t = 0)]
    pub saddle: usize,
}

#[derive(Args, Debug)]
pub struct OrderArgs {
    #[command(flatten)]
    pub common: Common,
    /// radii |lambda|^lo .. |lambda|^hi
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 8.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 15)]
    pub radii: usize,
    #[arg(long, default_value_t = 256)]
    pub angles: usize,
    #[arg(long, default_value_t = 40)]
    pub order: usize,
    #[arg(long, default_value_t = 0)]
    pub saddle: usize,
    /// relative tolerance for the order law check
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct KtildeArgs {
    #[command(flatten)]
    pub common: Common,
    /// chart half-width R
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
    #[arg(long, default_value_t = 40)]
    pub order: usize,
    #[arg(long, default_value_t = 0)]
    pub saddle: usize,
    /// also compute a chart at twice the resolution and report the bridgedness verdict
    #[arg(long)]
    pub bridged: bool,
}

#[derive(Args, Debug)]
pub struct YoccozArgs {
    #[command(flatten)]
    pub common: Common,
    /// branch of log(lambda) as re,im
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub p: i64,
    #[arg(long, default_value_t = 1)]
    pub q: i64,
    #[arg(long = "N", default_value_t = 1)]
    pub n: i64,
    #[arg(long, default_value_t = 2)]
    pub d: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslationOp {
    /// Y^n cell index
    Y,
    /// P^n
    P,
    /// Delta cell and S
    S,
    /// inverse of S
    T,
    /// range oracle for theta_A
    Range,
    /// epsilon-budget interval run
    Budget,
    /// power-map range oracle
    Power,
    /// table of Y^n walls
    Walls,
}

#[derive(Args, Debug)]
pub struct TranslationArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub op: Option<TranslationOp>,
    /// real parts as rationals: a/b,c,d.e,...
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// imaginary parts (default 0)
    #[arg(long, allow_hyphen_values = true)]
    pub imag: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub n: i64,
    /// epsilon as a rational (range/budget) or decimal (power)
    #[arg(long, default_value = "1/3")]
    pub eps: String,
    #[arg(long, default_value_t = 100_000)]
    pub cap: i64,
    /// dimension for the walls table
    #[arg(long, default_value_t = 3)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct StripsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "1")]
    pub a: String,
    #[arg(long = "K", default_value_t = 1)]
    pub big_k: i64,
    #[arg(long = "M", default_value = "16")]
    pub m: String,
    /// factors such as V1,V2,V1 or D0:1,D1:-2,... or E0:1,... (n:l)
    #[arg(long, allow_hyphen_values = true)]
    pub product: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
}

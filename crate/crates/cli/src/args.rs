use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 2024;

#[derive(Debug, Parser)]
#[command(
    name = "finescale",
    version,
    about = "Fine-scale statistics of real-valued vector sequences"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Sequence spec file (JSON)
    #[arg(long, global = true, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    /// Built-in spec by name instead of a file
    #[arg(long, global = true, value_name = "NAME", conflicts_with = "spec")]
    pub preset: Option<String>,
    /// Override the spec's N
    #[arg(long = "N", global = true, value_name = "N")]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Scale parameter; repeat for several values
    #[arg(long = "s", global = true, value_name = "S")]
    pub s: Vec<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; 0 uses every core
    #[arg(long, global = true, env = "FINESCALE_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Output file; `-` is standard output
    #[arg(long, global = true, default_value = "-", value_name = "FILE")]
    pub out: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GammaRuleArg {
    Constant,
    InverseN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Fast,
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Smoothing {
    Indicator,
    Selberg,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    /// Component index
    #[arg(long, default_value_t = 0)]
    pub component: usize,
    /// Comma-separated N values; a table instead of a single count
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<usize>,
    #[arg(long, value_enum, default_value_t = GammaRuleArg::Constant)]
    pub gamma_rule: GammaRuleArg,
}

#[derive(Debug, Args)]
pub struct MomentArgs {
    /// Degree multiplier: K = t N^r
    #[arg(long, default_value_t = 2)]
    pub t: u64,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    pub sign: SignArg,
    /// Deterministic quadrature over alpha instead of sampled draws
    #[arg(long)]
    pub quadrature: bool,
    /// Quadrature nodes per axis segment
    #[arg(long, default_value_t = 100_000)]
    pub nodes: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every component on 0..=N
    Materialize,
    /// Pair correlation R2(s) for one alpha
    Paircorr {
        /// Explicit alpha, comma-separated; otherwise draw `--draw` of the sampler
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        draw: u64,
    },
    /// Additive energy of one component
    Energy {
        #[command(flatten)]
        energy: EnergyArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Fast)]
        method: MethodArg,
    },
    /// Joint solution count of the Diophantine system
    #[command(name = "thm1-count")]
    Thm1Count {
        /// Coefficient range; defaults to N^r
        #[arg(long)]
        jmax: Option<u64>,
        #[arg(long)]
        budget: Option<u128>,
    },
    /// Build both Selberg polynomials and check the sandwich
    #[command(name = "selberg-check")]
    SelbergCheck {
        /// Scale Delta; the window half-width is s / Delta
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long = "K")]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        grid_size: usize,
    },
    /// Draws from the averaging measure
    #[command(name = "mu-sample")]
    MuSample {
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Index of the first draw
        #[arg(long, default_value_t = 0)]
        start: u64,
    },
    /// Expected pair correlation over alpha
    Expectation {
        #[arg(long, value_enum, default_value_t = Smoothing::Indicator)]
        smoothing: Smoothing,
        #[command(flatten)]
        moment: MomentArgs,
    },
    /// Smoothed variance over alpha
    Variance {
        #[command(flatten)]
        moment: MomentArgs,
    },
    /// Log-log growth exponent of an energy table
    Slope {
        /// Table file (CSV with N,count columns or JSON); otherwise computed from the spec
        #[arg(long)]
        table: Option<PathBuf>,
        #[command(flatten)]
        energy: EnergyArgs,
    },
    /// Compare energy growth against a theorem's threshold
    Verify {
        #[arg(long)]
        theorem: u8,
        #[arg(long)]
        r: Option<usize>,
        /// Precomputed table, one per component (repeatable)
        #[arg(long)]
        table: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        grid: Vec<usize>,
        #[arg(long)]
        delta_margin: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        jmax: Option<u64>,
    },
    /// Pair correlation over an N grid and several alpha draws
    Sweep {
        #[arg(long, value_delimiter = ',')]
        grid: Vec<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Materialize => "materialize",
            Command::Paircorr { .. } => "paircorr",
            Command::Energy { .. } => "energy",
            Command::Thm1Count { .. } => "thm1-count",
            Command::SelbergCheck { .. } => "selberg-check",
            Command::MuSample { .. } => "mu-sample",
            Command::Expectation { .. } => "expectation",
            Command::Variance { .. } => "variance",
            Command::Slope { .. } => "slope",
            Command::Verify { .. } => "verify",
            Command::Sweep { .. } => "sweep",
        }
    }
}

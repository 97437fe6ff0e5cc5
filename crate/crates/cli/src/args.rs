use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gpcq", version, about = "Capacities and coding simulations for classical-quantum channels with sender-known state")]
pub struct Cli {
    /// Emit machine-readable JSON instead of text or CSV.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a channel document.
    Validate(ValidateArgs),
    /// Single-letter causal capacity with its optimal strategy.
    Causal(CausalArgs),
    /// Multistart lower bound on the non-causal capacity at blocklength n.
    Noncausal(NoncausalArgs),
    /// Holevo capacity of the channel at one fixed state.
    Holevo(HolevoArgs),
    /// Method-of-types utilities.
    Types(TypesArgs),
    /// Young frames, irrep dimensions and projector checks.
    Schur(SchurArgs),
    /// Rate/error curve of the random-coding schemes.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct CausalArgs {
    pub file: PathBuf,
    /// Auxiliary alphabet size (default |S|(|X|-1)+2).
    #[arg(long, value_name = "K")]
    pub aux_size: Option<usize>,
    /// Use the looser auxiliary size |S||X|.
    #[arg(long, conflicts_with = "aux_size")]
    pub loose_aux: bool,
    /// Inner duality-gap tolerance in bits.
    #[arg(long, value_name = "E", default_value_t = gpcq_core::causal::DEFAULT_EPS)]
    pub eps: f64,
    /// Cap on the number of raw strategies.
    #[arg(long, value_name = "N", default_value_t = gpcq_core::causal::DEFAULT_STRATEGY_CAP)]
    pub cap: u128,
}

#[derive(Debug, Args)]
pub struct NoncausalArgs {
    pub file: PathBuf,
    /// Blocklength.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, value_name = "K")]
    pub aux_size: Option<usize>,
    #[arg(long, value_name = "R", default_value_t = gpcq_core::noncausal::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long)]
    pub seed: u64,
    /// Permit blocklengths above 2.
    #[arg(long)]
    pub allow_long_blocks: bool,
}

#[derive(Debug, Args)]
pub struct HolevoArgs {
    pub file: PathBuf,
    /// State label to fix (required when the channel has several states).
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long, value_name = "E", default_value_t = gpcq_core::causal::DEFAULT_EPS)]
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TypesOp {
    ClassSize,
    Nearest,
    TypicalMass,
    Coverage,
}

#[derive(Debug, Args)]
pub struct TypesArgs {
    #[arg(long, value_enum)]
    pub op: TypesOp,
    /// Letter counts of a type (class-size).
    #[arg(long, value_delimiter = ',', value_name = "C1,C2,..")]
    pub counts: Vec<u64>,
    /// Distribution (nearest, typical-mass).
    #[arg(long, value_delimiter = ',', value_name = "P1,P2,..")]
    pub p: Vec<f64>,
    /// Joint law over S x U, rows separated by ';' (coverage).
    #[arg(long, value_name = "ROWS")]
    pub p_su: Option<String>,
    /// Blocklength; for typical-mass, the largest blocklength of the sweep when --sweep is set.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Sweep typical-mass over 1..=n and report the threshold.
    #[arg(long)]
    pub sweep: bool,
    /// Codewords (coverage).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, required_if_eq("op", "coverage"))]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchurOp {
    Frames,
    Dims,
    Check,
}

#[derive(Debug, Args)]
pub struct SchurArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(value_enum)]
    pub op: SchurOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    CausalSequential,
    NoncausalSqrt,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub file: PathBuf,
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long, value_delimiter = ',', required = true)]
    pub rates: Vec<f64>,
    #[arg(long = "n", value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    /// Codewords per message for the non-causal scheme.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = gpcq_core::coding::DEFAULT_DELTA)]
    pub delta: f64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mqc", version, about = "Compile circuits to measurement-only programs and reproduce the model's statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower a circuit file to a program file.
    Compile(CompileArgs),
    /// Execute a circuit or program once.
    Run(RunArgs),
    /// Seeded executions compared with the dense circuit.
    Verify(VerifyArgs),
    /// Monte Carlo reproduction of the gadget and walk statistics.
    Stats(StatsArgs),
    /// Prepare the CNOT ancilla with both engines.
    Acn(AcnArgs),
    /// Hitting-time histogram of the two-qubit Pauli walk.
    Walk(WalkArgs),
    /// Deviation of `(I⊗Z) U^dagger (I⊗Z) U` from `U^2`.
    Usq(UsqArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    FourQubit,
    TwoQubitContinuous,
    TwoQubitDiscrete,
    SingleMeasurement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Eager,
    Deferred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    PauliGadget,
    Walk,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pass threshold; overrides `MQC_TOL` and the command default.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads; overrides `MQC_WORKERS`.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModeArgs {
    /// Required whenever a circuit is compiled.
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    /// Observable set for the discrete mode.
    #[arg(long = "set")]
    pub set: Option<String>,
    /// Angle of S1/S2; S0 uses `u = rz(set_theta)`.
    #[arg(long, default_value_t = mqc::compiler::DEFAULT_SET_THETA)]
    pub set_theta: f64,
    /// Special unitary angles for the single-measurement mode.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub mode: ModeArgs,
    pub circuit: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Policy::Deferred)]
    pub policy: Policy,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Treat the input as a program file rather than a circuit file.
    #[arg(long)]
    pub program: bool,
    #[arg(long, value_enum)]
    pub policy: Option<Policy>,
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, value_enum)]
    pub policy: Option<Policy>,
    pub circuit: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Pauli index of the gadget experiment.
    #[arg(long, default_value_t = 1)]
    pub pauli: usize,
    /// Walk target.
    #[arg(long, default_value = "IZ")]
    pub target: String,
}

#[derive(Debug, Clone, Args)]
pub struct AcnArgs {
    #[command(flatten)]
    pub common: Common,
    /// Force both parity outcomes to +1.
    #[arg(long)]
    pub post_select: bool,
}

#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value = "IZ")]
    pub target: String,
}

#[derive(Debug, Clone, Args)]
pub struct UsqArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
}

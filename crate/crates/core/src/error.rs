use thiserror::Error;

/// Errors raised by every layer of the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("gate arity {arity} does not match {targets} target(s)")]
    ArityMismatch { arity: usize, targets: usize },

    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid measurement: {0}")]
    InvalidSpec(String),

    /// The requested outcome has (numerically) zero probability.
    #[error("impossible branch: outcome probability {0:.3e}")]
    ImpossibleBranch(f64),

    #[error("{0} qubits exceeds the dense-engine cap of {1}")]
    TooManyQubits(usize, usize),

    #[error("operator {0} is not Hermitian")]
    NotHermitian(String),

    #[error("forced outcome {forced} contradicts determined outcome {determined}")]
    ContradictoryOutcome { forced: i8, determined: i8 },

    #[error("not a Pauli operator: {0}")]
    NotPauli(String),

    #[error("operator is not in the Clifford group")]
    NotClifford,

    #[error("theta = {0} is a multiple of pi/2")]
    DisallowedTheta(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("gave up after {0} rounds")]
    MaxRoundsExceeded(usize),

    #[error("register r{0} read before it was written")]
    UnwrittenRegister(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("qubit budget exceeded: {needed} physical qubits needed, cap {cap}")]
    QubitBudget { needed: usize, cap: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

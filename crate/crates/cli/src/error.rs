use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] mqc::Error),

    /// A reproduced statistic landed outside its 3-sigma band.
    #[error("statistical check failed: {0}")]
    Statistical(String),

    #[error("check failed: {0}")]
    Check(String),
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitCode(pub u8);

impl ExitCode {
    pub const OK: Self = Self(0);
    pub const USAGE: Self = Self(2);
    pub const UNSUPPORTED: Self = Self(3);
    pub const STATISTICAL: Self = Self(4);
    pub const INVARIANT: Self = Self(5);
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        use mqc::Error as E;
        match self {
            Self::Usage(_) | Self::Io { .. } => ExitCode::USAGE,
            Self::Statistical(_) => ExitCode::STATISTICAL,
            Self::Check(_) => ExitCode::INVARIANT,
            Self::Core(e) => match e {
                E::Parse(_)
                | E::InvalidSpec(_)
                | E::DisallowedTheta(_)
                | E::NotUnitary(_)
                | E::ArityMismatch { .. }
                | E::DuplicateTarget(_)
                | E::OutOfRange { .. }
                | E::DimensionMismatch { .. }
                | E::NotClifford
                | E::NotHermitian(_)
                | E::NotPauli(_) => ExitCode::USAGE,
                E::Unsupported(_) | E::QubitBudget { .. } | E::TooManyQubits(..) => ExitCode::UNSUPPORTED,
                _ => ExitCode::INVARIANT,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

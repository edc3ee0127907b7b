use derham_core::DeRhamError;
use morse_flow::MorseError;
use spectral_branches::SpectralError;
use thiserror::Error;
use torsion_lab::TorsionError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("f is not usable as a Morse function: {0}")]
    NotMorse(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}\nhint: increase --tmax (and, if the zero branches drift, the mode cutoff --modes)")]
    GapNotFound(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::NotMorse(_) => 2,
            Self::Numerical(_) | Self::Io(_) => 3,
            Self::GapNotFound(_) => 4,
        }
    }
}

impl From<DeRhamError> for CliError {
    fn from(e: DeRhamError) -> Self {
        match e {
            DeRhamError::CutoffTooSmall { .. } | DeRhamError::ArityMismatch { .. } => Self::Config(e.to_string()),
            other => Self::Numerical(other.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::GapNotFound { .. } => Self::GapNotFound(e.to_string()),
            SpectralError::Core(c) => c.into(),
            other => Self::Numerical(other.to_string()),
        }
    }
}

impl From<MorseError> for CliError {
    fn from(e: MorseError) -> Self {
        match e {
            MorseError::NonMorse { .. } | MorseError::ConstantFactor | MorseError::Unsupported(_) => {
                Self::NotMorse(e.to_string())
            }
            MorseError::Spectral(s) => s.into(),
            MorseError::Core(c) => c.into(),
            other => Self::Numerical(other.to_string()),
        }
    }
}

impl From<TorsionError> for CliError {
    fn from(e: TorsionError) -> Self {
        Self::Numerical(e.to_string())
    }
}

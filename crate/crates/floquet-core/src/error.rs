use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FloquetError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no Dirac point: {0}")]
    NoDiracPoint(String),
    #[error("inconsistent Bloch basis: {0}")]
    InconsistentBasis(String),
    #[error("symmetry violation: {0}")]
    SymmetryViolation(String),
    #[error("no defect mode in ({lo}, {hi})")]
    NoDefectMode { lo: f64, hi: f64 },
    #[error("zero mode is not isolated: {0}")]
    Ambiguous(String),
    #[error("non-normalizable domain wall: {0}")]
    InvalidWall(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },
}

impl FloquetError {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Self::Numerical(_) | Self::NonFinite { .. })
    }
}

pub type Result<T> = std::result::Result<T, FloquetError>;

use thiserror::Error;

/// Errors raised by the solution machinery.
///
/// Configuration and input problems are kept apart from the numerical-domain
/// failures (focal points, ill-posed inverses, ...) because the CLI maps them
/// to different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FpkError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("focal point: C(t) is singular (reciprocal condition {rcond:.3e})")]
    FocalPoint { rcond: f64 },

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("degenerate moment: {0}")]
    DegenerateMoment(String),

    #[error("delta limit: |t - s| = {gap:.3e} is below the kernel guard")]
    DeltaLimit { gap: f64 },

    #[error("kernel validity: {0}")]
    KernelValidity(String),

    #[error("normalization: total mass {mass} differs from 1 by more than {tolerance:e}")]
    Normalization { mass: f64, tolerance: f64 },

    #[error("truncation: density reaches {edge:.3e} at the grid boundary (limit {limit:e})")]
    Truncation { edge: f64, limit: f64 },

    #[error("ill-posed inverse: {0}")]
    IllPosedInverse(String),
}

impl FpkError {
    /// Short machine-readable name, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            FpkError::Config(_) => "config",
            FpkError::Input(_) => "input",
            FpkError::FocalPoint { .. } => "focal-point",
            FpkError::InvalidCovariance(_) => "invalid-covariance",
            FpkError::DegenerateMoment(_) => "degenerate-moment",
            FpkError::DeltaLimit { .. } => "delta-limit",
            FpkError::KernelValidity(_) => "kernel-validity",
            FpkError::Normalization { .. } => "normalization",
            FpkError::Truncation { .. } => "truncation",
            FpkError::IllPosedInverse(_) => "ill-posed-inverse",
        }
    }

    /// True for errors caused by the caller's data rather than by the
    /// mathematics of the requested pathway.
    pub fn is_config(&self) -> bool {
        matches!(self, FpkError::Config(_) | FpkError::Input(_))
    }
}

pub type Result<T> = std::result::Result<T, FpkError>;

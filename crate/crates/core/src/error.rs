use thiserror::Error;

/// Failures raised by a model while evaluating energies or group-level quantities.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("singular stiffness system: {mode}")]
    Singular { mode: String },
    #[error("matrix is not unimodular: det = {det}")]
    NotUnimodular { det: f64 },
    #[error("state pair leaves the single-slip subgroup (P0^-1 P1 = {found})")]
    OffSubgroup { found: String },
    #[error("deformation gradient is not on the simple-shear path: {found}")]
    OffShearPath { found: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("time {0} is not a grid node")]
    NotANode(f64),
    #[error("time {t} lies outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },
    #[error("unsupported strategy: {0}")]
    Strategy(String),
    #[error("step {step} failed: {reason}")]
    StepFailure { step: usize, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

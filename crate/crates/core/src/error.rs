use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single violated parameter invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

impl Violation {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), message: message.into() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<Violation>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("photon cutoff {cutoff} exceeded in mode {mode}")]
    Truncation { mode: String, cutoff: u8 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("{0}")]
    OpenSystemRequired(String),

    #[error("operator is not Hermitian (max |H - H^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("mixing angle undefined at t = {0}: both pulses vanish")]
    UndefinedAngle(f64),

    #[error("counter-diabatic schedule invalid: theta_dot = {theta_dot:e} < 0 at t = {t}")]
    NonMonotoneAngle { t: f64, theta_dot: f64 },

    #[error("{quantity} drift {drift:e} exceeds {tolerance:e} with {steps} steps; use at least {suggested} steps")]
    StepsTooFew { quantity: &'static str, drift: f64, tolerance: f64, steps: usize, suggested: usize },

    #[error(
        "density matrix lost positivity: min eigenvalue {min:e} with {steps} steps; use at least {suggested} steps"
    )]
    Positivity { min: f64, steps: usize, suggested: usize },

    #[error("target built for {target} schedule but trajectory used {schedule}")]
    TargetMismatch { target: String, schedule: String },

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::Config(_) => "config",
            Error::Truncation { .. } => "truncation",
            Error::Dimension { .. } => "dimension",
            Error::OpenSystemRequired(_) => "open_system_required",
            Error::NotHermitian(_) => "not_hermitian",
            Error::UndefinedAngle(_) => "undefined_angle",
            Error::NonMonotoneAngle { .. } => "non_monotone_angle",
            Error::StepsTooFew { .. } => "steps_too_few",
            Error::Positivity { .. } => "positivity",
            Error::TargetMismatch { .. } => "target_mismatch",
            Error::OutOfRange { .. } => "out_of_range",
            Error::UnknownScenario(_) => "unknown_scenario",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

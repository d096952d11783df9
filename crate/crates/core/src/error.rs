use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// The variants mirror the failure classes the CLI maps onto exit codes:
/// precondition and classification failures are verdict-level problems
/// (exit 2), everything else is an input or numerical failure.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum NevError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("numerical failure: {message} (partial estimate {partial})")]
    Numeric { message: String, partial: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("classification: {0}")]
    Classification(String),
}

impl NevError {
    pub fn arg(msg: impl Into<String>) -> Self {
        NevError::Argument(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        NevError::Precondition(msg.into())
    }

    /// True for the verdict-level failures (bad hypotheses, wrong spectral class).
    pub fn is_verdict_error(&self) -> bool {
        matches!(self, NevError::Precondition(_) | NevError::Classification(_))
    }
}

pub type Result<T> = std::result::Result<T, NevError>;

/// A possibly divergent numerical value.
///
/// Divergent integrals are reported as values, not errors, so sweeps can
/// continue past them.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimate {
    Finite { value: f64 },
    Divergent { sign: i8, reason: String },
}

/// Sentinel magnitude written in place of divergent values.
pub const DIVERGENCE_SENTINEL: f64 = 1e308;

impl Estimate {
    pub fn finite(value: f64) -> Self {
        Estimate::Finite { value }
    }

    pub fn divergent(sign: i8, reason: impl Into<String>) -> Self {
        Estimate::Divergent {
            sign,
            reason: reason.into(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Estimate::Finite { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Estimate::Finite { value } => Some(*value),
            Estimate::Divergent { .. } => None,
        }
    }

    /// Plain `f64`, with divergence mapped to `±DIVERGENCE_SENTINEL`.
    pub fn as_f64(&self) -> f64 {
        match self {
            Estimate::Finite { value } => *value,
            Estimate::Divergent { sign, .. } => f64::from(*sign) * DIVERGENCE_SENTINEL,
        }
    }
}

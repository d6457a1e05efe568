use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unknown boundary condition `{0}`")]
    UnknownBoundary(String),

    #[error("wave speed bisection failed to bracket a sign change on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("profile is not monotone near x = {x}")]
    NonMonotone { x: f64 },

    #[error("profile residual {residual:e} exceeds tolerance {tol:e}")]
    ProfileResidual { residual: f64, tol: f64 },

    #[error("landmark alpha = {alpha} outside admissible range ({lo}, {hi})")]
    LandmarkRange { alpha: f64, lo: f64, hi: f64 },

    #[error("weighted integral tail does not decay (rate {rate}) on the {side} side")]
    TailGrowth { side: &'static str, rate: f64 },

    #[error("functional inequality constant is not positive: min = {min} at x = {x}")]
    NonPositiveKappa { min: f64, x: f64 },

    #[error("weight inequality violated at x = {x}: lhs {lhs} < rhs {rhs}")]
    WeightInequality { x: f64, lhs: f64, rhs: f64 },

    #[error("test function does not vanish at the weight root: h = {value}")]
    Vanishing { value: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("phase shift {shift} leaves the admissible range |C| <= {limit}")]
    ShiftOutOfRange { shift: f64, limit: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors that come from the numerics rather than from the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Bracket { .. }
                | Error::NonMonotone { .. }
                | Error::ProfileResidual { .. }
                | Error::TailGrowth { .. }
                | Error::NonPositiveKappa { .. }
                | Error::WeightInequality { .. }
                | Error::LinearSolve(_)
                | Error::ShiftOutOfRange { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("laser detuning too small: |Δ| = {detuning_abs:.3e} rad/s must exceed 100·Γ = {limit:.3e} rad/s")]
    DetuningTooSmall { detuning_abs: f64, limit: f64 },

    #[error("power {p_w:.4e} W outside membrane calibration range [{min_w:.4e}, {max_w:.4e}] W")]
    OutOfCalibrationRange { p_w: f64, min_w: f64, max_w: f64 },

    #[error("operation requires at least one atom (N > 0)")]
    ZeroAtomNumber,

    #[error("atomic damping rate must be positive")]
    ZeroAtomDamping,

    #[error("cooling rate γ_c must be positive for the ensemble model")]
    ZeroCoolingRate,

    #[error("thermal sample list is empty")]
    EmptySamples,

    #[error("degenerate thermal distribution: truncation radius is zero")]
    DegenerateDistribution,

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("integrator step size underflow at t = {t:.6e} s")]
    StepSizeUnderflow { t: f64 },

    #[error("fit needs at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("decay fit requires strictly positive samples")]
    NonPositiveSample,

    #[error("linear fit requires non-degenerate abscissae")]
    DegenerateAbscissa,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code class: 2 for configuration/validation failures,
    /// 3 for numerical or runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DetuningTooSmall { .. }
            | Error::OutOfCalibrationRange { .. }
            | Error::ZeroAtomNumber
            | Error::ZeroAtomDamping
            | Error::ZeroCoolingRate
            | Error::EmptySamples
            | Error::DegenerateDistribution
            | Error::InsufficientData { .. }
            | Error::NonPositiveSample
            | Error::DegenerateAbscissa
            | Error::Config(_) => 2,
            Error::NonFinite { .. } | Error::StepSizeUnderflow { .. } | Error::Io(_) => 3,
        }
    }
}

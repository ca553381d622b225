use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A four-momentum that should satisfy `p_a p^a = -1` does not.
    #[error("off-shell momentum: p.p + 1 = {defect:e}")]
    OffShell { defect: f64 },

    #[error("scattering angle undefined for vanishing relative momentum")]
    UndefinedAngle,

    #[error("energy condition violated: rho = {rho:e}")]
    EnergyCondition { rho: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

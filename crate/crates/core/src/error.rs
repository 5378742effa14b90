//! Error type shared by all solver stages.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-range input; the message names the offending field.
    #[error("invalid input `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("radial velocity becomes sonic near r = {r} (M1^2 = {m1_sq})")]
    SonicRadialVelocity { r: f64, m1_sq: f64 },

    #[error("vacuum or invalid state at r = {r} (rho = {rho})")]
    VacuumOrInvalid { r: f64, rho: f64 },

    #[error("the background flow has no sonic point in the annulus")]
    NoSonicPoint,

    #[error("the background flow has no supersonic region in the annulus")]
    NoSupersonicRegion,

    #[error("radial velocity {value} too small at (r, eta) = ({r}, {eta})")]
    DegenerateRadialVelocity { r: f64, eta: f64, value: f64 },

    #[error("singular tridiagonal system for Fourier mode {mode} at row {row}")]
    SingularMode { mode: usize, row: usize },

    #[error("operator not elliptic: min k22 = {min_k22} at r = {r}")]
    NotElliptic { min_k22: f64, r: f64 },

    #[error("boundary datum q3 has nonzero mean {mean}")]
    ZeroMeanViolation { mean: f64 },

    #[error("vacuum state: Bernoulli bracket {bracket} below threshold {threshold} at (r, eta) = ({r}, {eta})")]
    VacuumState {
        r: f64,
        eta: f64,
        bracket: f64,
        threshold: f64,
    },

    #[error("`helical.sigma` = {sigma} is not below the critical step sigma* = {sigma_star}")]
    StepTooLarge { sigma: f64, sigma_star: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last ratio {last_ratio})")]
    NoConvergence { iterations: usize, last_ratio: f64 },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Wraps the error with the name of the stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for errors caused by invalid user input rather than solver failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidInput { .. } | Error::StepTooLarge { .. } | Error::ZeroMeanViolation { .. }
        )
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}

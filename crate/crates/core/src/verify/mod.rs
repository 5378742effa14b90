//! Independent correctness oracles and the `verify.json` ledger.

mod equivalence;
mod identities;
mod ledger;
mod mms;
mod oracles;
mod residual;
mod scaling;

use serde::{Deserialize, Serialize};

pub use equivalence::{equivalence_check, equivalence_trial, EquivalenceReport, EquivalenceTrial, RandomFields};
pub use identities::identity_checks;
pub use ledger::{verification_ledger, DENSE_NODES};
pub use mms::{
    mms_study, poisson_mms_error, potential_mms_error, MmsLevel, MmsStudy, PotentialManufactured,
};
pub use oracles::{adaptive_simpson, unperturbed_exit_eta, upwind_transport};
pub use residual::{euler_residual, ResidualNorms, ResidualReport, TransportDefects, INTERIOR_MARGIN};
pub use scaling::{scaling_study, ScalingRow, ScalingStudy};

/// Absolute level below which differences are treated as floating-point noise.
pub const ROUNDOFF_TIER: f64 = 1e-12;

/// One line of the verification ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: threshold,
            pass: value > threshold,
        }
    }
}

/// Collection of checks with the seeds used to produce them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub checks: Vec<Check>,
    pub seeds: Vec<u64>,
}

impl Ledger {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }
}

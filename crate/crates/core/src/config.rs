//! JSON run configuration.
//!
//! Keys mirror the physical notation (`A0`, `U10`, `N_r`, ...). Unknown keys
//! are rejected at every level. The `q3` arrays start at mode 1, so the
//! axial datum has zero mean by construction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assembly::{FourierSeries, HelicalBC};
use crate::background::{reference_inflow, GasInflow};
use crate::error::{Error, Result};
use crate::fields::AnnulusGrid;
use crate::solver::{SolverConfig, DEFAULT_MAX_ITERS, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    pub gamma: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflowSection {
    pub rho0: f64,
    #[serde(rename = "U10")]
    pub u10: f64,
    #[serde(rename = "U20")]
    pub u20: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusSection {
    pub r0: f64,
    pub r1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelicalSection {
    pub sigma: f64,
    pub eps: f64,
}

/// Cosine and sine coefficients of one boundary function.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    #[serde(default)]
    pub qc: Coefficients,
    #[serde(default)]
    pub q1: Coefficients,
    /// Modes `1, 2, ...`; entry `k` is mode `k + 1`.
    #[serde(default)]
    pub q3: Coefficients,
    #[serde(default, rename = "Atilde")]
    pub a_tilde: Coefficients,
    #[serde(default, rename = "Btilde")]
    pub b_tilde: Coefficients,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "N_r")]
    pub n_r: usize,
    #[serde(rename = "N_eta")]
    pub n_eta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gas: GasSection,
    pub inflow: InflowSection,
    pub annulus: AnnulusSection,
    pub helical: HelicalSection,
    #[serde(default)]
    pub boundary: BoundarySection,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
}

impl Coefficients {
    fn to_series(&self) -> FourierSeries {
        FourierSeries {
            cos: self.cos.clone(),
            sin: self.sin.clone(),
        }
    }

    /// Series whose entry `k` is mode `k + 1`.
    fn to_shifted_series(&self) -> FourierSeries {
        let shift = |v: &[f64]| std::iter::once(0.0).chain(v.iter().copied()).collect();
        FourierSeries {
            cos: shift(&self.cos),
            sin: shift(&self.sin),
        }
    }

    fn from_series(s: &FourierSeries) -> Self {
        Self {
            cos: s.cos.clone(),
            sin: s.sin.clone(),
        }
    }
}

impl RunConfig {
    /// The reference configuration with single-mode data at `sigma`, `eps`.
    pub fn reference(sigma: f64, eps: f64, n_r: usize, n_eta: usize) -> Self {
        let inflow = reference_inflow();
        let bc = HelicalBC::single_mode(sigma, eps);
        let unshift = |s: &FourierSeries| Coefficients {
            cos: s.cos.iter().skip(1).copied().collect(),
            sin: s.sin.iter().skip(1).copied().collect(),
        };
        Self {
            gas: GasSection {
                gamma: inflow.gamma,
                a0: inflow.a0,
            },
            inflow: InflowSection {
                rho0: inflow.rho0,
                u10: inflow.u10,
                u20: inflow.u20,
            },
            annulus: AnnulusSection {
                r0: inflow.r0,
                r1: inflow.r1,
            },
            helical: HelicalSection { sigma, eps },
            boundary: BoundarySection {
                qc: Coefficients::from_series(&bc.qc),
                q1: Coefficients::from_series(&bc.q1),
                q3: unshift(&bc.q3),
                a_tilde: Coefficients::from_series(&bc.a_tilde),
                b_tilde: Coefficients::from_series(&bc.b_tilde),
            },
            grid: GridSection { n_r, n_eta },
            solver: SolverSection::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn inflow(&self) -> GasInflow {
        GasInflow {
            gamma: self.gas.gamma,
            a0: self.gas.a0,
            rho0: self.inflow.rho0,
            u10: self.inflow.u10,
            u20: self.inflow.u20,
            r0: self.annulus.r0,
            r1: self.annulus.r1,
        }
    }

    pub fn bc(&self) -> HelicalBC {
        let b = &self.boundary;
        HelicalBC {
            sigma: self.helical.sigma,
            eps: self.helical.eps,
            qc: b.qc.to_series(),
            q1: b.q1.to_series(),
            q3: b.q3.to_shifted_series(),
            a_tilde: b.a_tilde.to_series(),
            b_tilde: b.b_tilde.to_series(),
        }
    }

    /// Checks everything that does not need the background solve.
    pub fn validate(&self) -> Result<()> {
        self.inflow().validate()?;
        self.bc().validate()?;
        AnnulusGrid::new(self.annulus.r0, self.annulus.r1, self.grid.n_r, self.helical.sigma, self.grid.n_eta)?;
        if !(self.solver.tol.is_finite() && self.solver.tol > 0.0) {
            return Err(Error::invalid("solver.tol", format!("need tol > 0, got {}", self.solver.tol)));
        }
        if self.solver.max_iters == 0 {
            return Err(Error::invalid("solver.max_iters", "need max_iters >= 1"));
        }
        Ok(())
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        self.validate()?;
        Ok(SolverConfig {
            inflow: self.inflow(),
            bc: self.bc(),
            n_r: self.grid.n_r,
            n_eta: self.grid.n_eta,
            tol: self.solver.tol,
            max_iters: self.solver.max_iters,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "gas": {"gamma": 2, "A0": 1},
        "inflow": {"rho0": 1, "U10": -0.3, "U20": 0.5},
        "annulus": {"r0": 1.06, "r1": 2},
        "helical": {"sigma": 7, "eps": 0.001},
        "boundary": {"q3": {"cos": [1.0]}},
        "grid": {"N_r": 65, "N_eta": 32}
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.solver, SolverSection::default());
        let bc = c.bc();
        assert_eq!(bc.q3.cos, vec![0.0, 1.0]);
        assert_eq!(bc.q3.mean(), 0.0);
        assert!(c.solver_config().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("\"A0\": 1", "\"A0\": 1, \"B0\": 2");
        let err = RunConfig::from_json(&bad).unwrap_err();
        assert!(err.to_string().contains("B0"), "{err}");
        let bad = MINIMAL.replace("\"q3\"", "\"q2\"");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = RunConfig::from_json(MINIMAL).unwrap();
        c.helical.eps = 0.5;
        assert!(c.validate().unwrap_err().to_string().contains("helical.eps"));
        c.helical.eps = 1e-3;
        c.grid.n_eta = 3;
        assert!(c.validate().unwrap_err().to_string().contains("N_eta"));
    }

    #[test]
    fn reference_matches_single_mode_data() {
        let c = RunConfig::reference(5.0, 1e-3, 65, 32);
        assert_eq!(c.bc(), HelicalBC::single_mode(5.0, 1e-3));
        assert_eq!(c.inflow(), reference_inflow());
    }
}

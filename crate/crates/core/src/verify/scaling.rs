//! Dependence of the converged perturbation on the boundary amplitude.

use serde::{Deserialize, Serialize};

use crate::assembly::FlowField;
use crate::background::CoefficientTable;
use crate::error::Result;
use crate::fields::{c_norms, Field2D, Norms};
use crate::solver::{fixed_point_solve, SolverConfig};

/// Names of the five reported deviations from the background.
pub const QUANTITIES: [&str; 5] = ["V1-U1", "V2-kappa2/r", "V3", "A-A0", "B-B0"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub iterations: usize,
    pub norms: [Norms; 5],
    /// `C^0` norm over `eps`; absent for `eps = 0`.
    pub ratios: Option<[f64; 5]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub quantities: [String; 5],
    pub rows: Vec<ScalingRow>,
    /// Per quantity, `(max - min) / min` of the ratios over rows with `eps > 0`.
    pub spread: [f64; 5],
}

/// The five deviations of `flow` from the background.
pub fn deviations(flow: &FlowField, t: &CoefficientTable) -> [Field2D; 5] {
    let g = flow.grid();
    let bg_v1 = Field2D::from_radial(g, |i| t.point(i).u1);
    let bg_v2 = Field2D::from_radial(g, |i| t.point(i).u2);
    [
        &flow.v1 - &bg_v1,
        &flow.v2 - &bg_v2,
        flow.v3.clone(),
        flow.a.map(|a| a - t.a0),
        flow.b.map(|b| b - t.b0),
    ]
}

/// Solves once per amplitude and tabulates the deviation norms.
pub fn scaling_study(cfg: &SolverConfig, eps_list: &[f64]) -> Result<ScalingStudy> {
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let sol = fixed_point_solve(&cfg.with_eps(eps))?;
        let dev = deviations(&sol.flow, &sol.problem.table);
        let norms: [Norms; 5] = std::array::from_fn(|k| c_norms(&dev[k]));
        let ratios = (eps > 0.0).then(|| std::array::from_fn(|k| norms[k].c0 / eps));
        rows.push(ScalingRow {
            eps,
            iterations: sol.report.iterations,
            norms,
            ratios,
        });
    }
    let spread = std::array::from_fn(|k| {
        let vals: Vec<f64> = rows.iter().filter_map(|r| r.ratios.map(|x| x[k])).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        if vals.is_empty() || lo == 0.0 {
            0.0
        } else {
            (hi - lo) / lo
        }
    });
    Ok(ScalingStudy {
        quantities: QUANTITIES.map(String::from),
        rows,
        spread,
    })
}

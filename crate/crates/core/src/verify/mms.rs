//! Manufactured-solution convergence studies for the two elliptic solvers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assembly::{FourierSeries, HelicalBC};
use crate::background::{coefficient_table, solve_background, CoefficientTable, GasInflow};
use crate::elliptic::{solve_poisson, solve_potential};
use crate::error::Result;
use crate::fields::{AnnulusGrid, Field2D};

/// Max error of the Poisson solve against `sin(w eta) sin(pi (r - r0) / (2 L))`.
pub fn poisson_mms_error(grid: AnnulusGrid) -> Result<f64> {
    let w = grid.omega1();
    let kr = PI / (2.0 * (grid.r1 - grid.r0));
    let exact = Field2D::from_fn(grid, |r, e| (w * e).sin() * (kr * (r - grid.r0)).sin());
    let src = exact.scale(-(kr * kr + w * w));
    let phi = solve_poisson(&src)?;
    Ok((&phi - &exact).max_abs())
}

/// `phi* = sin(w eta) g(r) + cos(w eta) m(r) + m0(r)` with `m(r1) = m0(r1) = 0`, `s = (r - r0)/L`:
/// `g = 1 + s^2/2`, `m = (1 - s) e^s / 2`, `m0 = (1 - s^2) / 4`.
#[derive(Debug, Clone, Copy)]
pub struct PotentialManufactured {
    pub r0: f64,
    pub r1: f64,
    pub omega: f64,
}

impl PotentialManufactured {
    fn s(&self, r: f64) -> (f64, f64) {
        let l = self.r1 - self.r0;
        ((r - self.r0) / l, 1.0 / l)
    }

    /// `(g, g', g'')`, `(m, m', m'')`, `(m0, m0', m0'')` at `r`.
    fn profiles(&self, r: f64) -> [[f64; 3]; 3] {
        let (s, il) = self.s(r);
        let es = s.exp();
        [
            [1.0 + 0.5 * s * s, s * il, il * il],
            [0.5 * (1.0 - s) * es, -0.5 * s * es * il, -0.5 * (1.0 + s) * es * il * il],
            [0.25 * (1.0 - s * s), -0.5 * s * il, -0.5 * il * il],
        ]
    }

    pub fn value(&self, r: f64, eta: f64) -> f64 {
        let [g, m, m0] = self.profiles(r);
        let (sn, cs) = (self.omega * eta).sin_cos();
        sn * g[0] + cs * m[0] + m0[0]
    }

    /// `(phi_r, phi_e, phi_rr, phi_re, phi_ee)`.
    pub fn derivatives(&self, r: f64, eta: f64) -> [f64; 5] {
        let [g, m, m0] = self.profiles(r);
        let w = self.omega;
        let (sn, cs) = (w * eta).sin_cos();
        [
            sn * g[1] + cs * m[1] + m0[1],
            w * (cs * g[0] - sn * m[0]),
            sn * g[2] + cs * m[2] + m0[2],
            w * (cs * g[1] - sn * m[1]),
            -w * w * (sn * g[0] + cs * m[0]),
        ]
    }

    /// Boundary data with `eps = 1`: `q1 = d_r phi*(r0)`, `q3 = d_eta phi*(r1)`.
    pub fn boundary(&self, sigma: f64) -> HelicalBC {
        let [g0, m0, w0] = self.profiles(self.r0);
        let [g1, _, _] = self.profiles(self.r1);
        HelicalBC {
            sigma,
            eps: 1.0,
            qc: FourierSeries::zero(),
            q1: FourierSeries {
                cos: vec![w0[1], m0[1]],
                sin: vec![0.0, g0[1]],
            },
            q3: FourierSeries {
                cos: vec![0.0, self.omega * g1[0]],
                sin: vec![0.0, 0.0],
            },
            a_tilde: FourierSeries::zero(),
            b_tilde: FourierSeries::zero(),
        }
    }

    /// `A11 phi_rr + 2 A13 phi_re + A33 phi_ee + e1 phi_r + e3 phi_e` with the full `e1`, `e3`.
    pub fn source(&self, grid: AnnulusGrid, t: &CoefficientTable) -> Field2D {
        let mut out = Field2D::zeros(grid);
        for i in 0..grid.n_r {
            let r = grid.r(i);
            for j in 0..grid.n_eta {
                let [pr, pe, prr, pre, pee] = self.derivatives(r, grid.eta(j));
                out.values[[i, j]] = t.a11[i] * prr
                    + 2.0 * t.a13[i] * pre
                    + t.a33[i] * pee
                    + t.e1_full(i) * pr
                    + t.e3_full(i) * pe;
            }
        }
        out
    }
}

/// Max error of the potential solve for the background of `inflow` at step
/// `sigma_coeff` (used in the coefficients) and period `grid.sigma`.
pub fn potential_mms_error(inflow: GasInflow, sigma_coeff: f64, grid: AnnulusGrid) -> Result<f64> {
    let bg = solve_background(inflow, grid.n_r)?;
    let t = coefficient_table(&bg, sigma_coeff)?;
    let m = PotentialManufactured {
        r0: grid.r0,
        r1: grid.r1,
        omega: grid.omega1(),
    };
    let g3 = m.source(grid, &t);
    let sol = solve_potential(&g3, &t, &m.boundary(grid.sigma))?;
    let exact = Field2D::from_fn(grid, |r, e| m.value(r, e));
    Ok((&sol.phi - &exact).max_abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsLevel {
    pub n_r: usize,
    pub poisson_error: f64,
    pub potential_error: f64,
}

/// Errors per refinement level and the successive error ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsStudy {
    pub n_eta: usize,
    pub sigma: f64,
    pub levels: Vec<MmsLevel>,
    pub poisson_ratios: Vec<f64>,
    pub potential_ratios: Vec<f64>,
}

/// Runs both manufactured problems on `N_r = 128 * 2^l + 1`, `l < levels`, for step `sigma`.
pub fn mms_study(inflow: GasInflow, sigma: f64, levels: usize, n_eta: usize) -> Result<MmsStudy> {
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        let n_r = 128 * (1 << l) + 1;
        let grid = AnnulusGrid::new(inflow.r0, inflow.r1, n_r, sigma, n_eta)?;
        out.push(MmsLevel {
            n_r,
            poisson_error: poisson_mms_error(grid)?,
            potential_error: potential_mms_error(inflow, sigma, grid)?,
        });
    }
    let ratios = |f: fn(&MmsLevel) -> f64| out.windows(2).map(|w| f(&w[0]) / f(&w[1])).collect::<Vec<_>>();
    Ok(MmsStudy {
        n_eta,
        sigma,
        poisson_ratios: ratios(|l| l.poisson_error),
        potential_ratios: ratios(|l| l.potential_error),
        levels: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_derivatives_match_differences() {
        let m = PotentialManufactured {
            r0: 1.04,
            r1: 2.0,
            omega: 1.3,
        };
        let (r, e, h) = (1.5, 0.4, 1e-5);
        let d = m.derivatives(r, e);
        let fr = (m.value(r + h, e) - m.value(r - h, e)) / (2.0 * h);
        let fe = (m.value(r, e + h) - m.value(r, e - h)) / (2.0 * h);
        let frr = (m.value(r + h, e) - 2.0 * m.value(r, e) + m.value(r - h, e)) / (h * h);
        assert!((d[0] - fr).abs() < 1e-8 && (d[1] - fe).abs() < 1e-8);
        assert!((d[2] - frr).abs() < 1e-4);
        let q = m.boundary(2.0 * PI / 1.3).q3.antiderivative(0.3, 2.0 * PI / 1.3);
        assert!((m.value(2.0, 0.3) - q).abs() < 1e-14);
    }
}

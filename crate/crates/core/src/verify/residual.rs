//! Residuals of the helical Euler system on a reconstructed flow.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assembly::FlowField;
use crate::background::CoefficientTable;
use crate::fields::Field2D;

/// Rows skipped at each wall so that only centred radial stencils are used.
pub const INTERIOR_MARGIN: usize = 2;

/// Max-norm residuals of the five equations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualNorms {
    pub continuity: f64,
    pub r_momentum: f64,
    pub theta_momentum: f64,
    pub z_momentum: f64,
    pub entropy: f64,
}

impl ResidualNorms {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.continuity,
            self.r_momentum,
            self.theta_momentum,
            self.z_momentum,
            self.entropy,
        ]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            continuity: a[0],
            r_momentum: a[1],
            theta_momentum: a[2],
            z_momentum: a[3],
            entropy: a[4],
        }
    }

    pub const NAMES: [&'static str; 5] = ["continuity", "r_momentum", "theta_momentum", "z_momentum", "entropy"];
}

/// Max-norm defects of transport of `B`, `A` and `V_c` along the flow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TransportDefects {
    pub bernoulli: f64,
    pub entropy: f64,
    pub swirl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub norms: ResidualNorms,
    /// Radius at which each of the five residuals attains its maximum.
    pub argmax_r: [f64; 5],
    pub transport: TransportDefects,
    pub n_r: usize,
    pub n_eta: usize,
}

/// `d_r q` as the analytic background slope plus a fourth-order difference of the perturbation.
fn d_r_split(q: &Field2D, qbar: impl Fn(usize) -> f64, qbar_r: impl Fn(usize) -> f64) -> Field2D {
    let g = q.grid;
    let pert = Field2D::from_values(
        g,
        ndarray::Array2::from_shape_fn(q.values.dim(), |(i, j)| q.values[[i, j]] - qbar(i)),
    );
    let mut d = pert.d_r4();
    for i in 0..g.n_r {
        let s = qbar_r(i);
        d.values.row_mut(i).mapv_inplace(|v| v + s);
    }
    d
}

/// Evaluates the helical Euler system and the transport defects on interior nodes.
///
/// Radial derivatives split each quantity into its background profile, whose
/// slope is taken from the background ODE, and a perturbation differentiated
/// with fourth-order central differences; `eta` derivatives are spectral.
pub fn euler_residual(flow: &FlowField, t: &CoefficientTable) -> ResidualReport {
    let g = flow.grid();
    assert_eq!(t.len(), g.n_r, "coefficient table and field grid differ");
    let sigma = flow.sigma;
    let gamma = flow.gamma;
    let pts: Vec<_> = (0..g.n_r).map(|i| *t.point(i)).collect();
    let rho_v1 = flow.rho.zip_with(&flow.v1, |a, b| a * b);
    let rho_v2 = flow.rho.zip_with(&flow.v2, |a, b| a * b);
    let rho_v3 = flow.rho.zip_with(&flow.v3, |a, b| a * b);
    let vc = flow.swirl();

    let d_rho_v1 = d_r_split(
        &rho_v1,
        |i| pts[i].rho * pts[i].u1,
        |i| pts[i].rho_prime() * pts[i].u1 + pts[i].rho * pts[i].u1_prime(),
    );
    let d_v1 = d_r_split(&flow.v1, |i| pts[i].u1, |i| pts[i].u1_prime());
    let d_v2 = d_r_split(&flow.v2, |i| pts[i].u2, |i| -t.kappa2 / (pts[i].r * pts[i].r));
    let d_v3 = flow.v3.d_r4();
    let d_p = d_r_split(
        &flow.p,
        |i| t.a0 * pts[i].rho.powf(gamma),
        |i| pts[i].c2 * pts[i].rho_prime(),
    );
    let d_a = d_r_split(&flow.a, |_| t.a0, |_| 0.0);
    let d_b = d_r_split(&flow.b, |_| t.b0, |_| 0.0);
    let d_vc = d_r_split(&vc, |_| t.kappa2, |_| 0.0);

    let e_rho_v2 = rho_v2.d_eta();
    let e_rho_v3 = rho_v3.d_eta();
    let e_v1 = flow.v1.d_eta();
    let e_v2 = flow.v2.d_eta();
    let e_v3 = flow.v3.d_eta();
    let e_p = flow.p.d_eta();
    let e_a = flow.a.d_eta();
    let e_b = flow.b.d_eta();
    let e_vc = vc.d_eta();

    let mut n = ResidualNorms::default();
    let mut d = TransportDefects::default();
    let mut argmax_r = [f64::NAN; 5];
    let upd = |m: &mut f64, v: f64| *m = m.max(v.abs());
    for i in INTERIOR_MARGIN..g.n_r - INTERIOR_MARGIN {
        let r = g.r(i);
        let k = sigma / (2.0 * PI * r);
        for j in 0..g.n_eta {
            let ix = [i, j];
            let v1 = flow.v1.values[ix];
            let v2 = flow.v2.values[ix];
            let rho = flow.rho.values[ix];
            let lam = k * v2 + flow.v3.values[ix];
            let conv = |dr: &Field2D, de: &Field2D| v1 * dr.values[ix] + lam * de.values[ix];
            let eqs = [
                d_rho_v1.values[ix] + k * e_rho_v2.values[ix] + rho_v1.values[ix] / r + e_rho_v3.values[ix],
                conv(&d_v1, &e_v1) + d_p.values[ix] / rho - v2 * v2 / r,
                conv(&d_v2, &e_v2) + k * e_p.values[ix] / rho + v1 * v2 / r,
                conv(&d_v3, &e_v3) + e_p.values[ix] / rho,
                conv(&d_a, &e_a),
            ];
            let mut arr = n.as_array();
            for (q, v) in eqs.iter().enumerate() {
                if v.abs() > arr[q] {
                    arr[q] = v.abs();
                    argmax_r[q] = r;
                }
            }
            n = ResidualNorms::from_array(arr);
            upd(&mut d.entropy, eqs[4]);
            upd(&mut d.bernoulli, conv(&d_b, &e_b));
            upd(&mut d.swirl, conv(&d_vc, &e_vc));
        }
    }
    ResidualReport {
        norms: n,
        argmax_r,
        transport: d,
        n_r: g.n_r,
        n_eta: g.n_eta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{reconstruct_flow, PerturbationState};
    use crate::background::{coefficient_table, reference_inflow, solve_background};
    use crate::fields::AnnulusGrid;

    fn background_flow(n_r: usize) -> (FlowField, CoefficientTable) {
        let inflow = reference_inflow();
        let bg = solve_background(inflow, n_r).unwrap();
        let t = coefficient_table(&bg, 4.0).unwrap();
        let g = AnnulusGrid::new(inflow.r0, inflow.r1, n_r, 4.0, 16).unwrap();
        (reconstruct_flow(&PerturbationState::zeros(g), &t).unwrap(), t)
    }

    #[test]
    fn background_has_small_residuals() {
        let (flow, t) = background_flow(1024);
        let rep = euler_residual(&flow, &t);
        for v in rep.norms.as_array() {
            assert!(v < 1e-8, "{:?}", rep.norms);
        }
    }

    #[test]
    fn corrupted_radial_velocity_is_detected() {
        let (flow, t) = background_flow(257);
        let base = euler_residual(&flow, &t).norms.continuity;
        let mut bad = flow.clone();
        let s = bad.sigma;
        bad.v1 = &bad.v1 + &Field2D::from_fn(bad.grid(), |_, e| 1e-3 * (2.0 * PI * e / s).sin());
        let hit = euler_residual(&bad, &t).norms.continuity;
        assert!(hit >= 10.0 * base.max(1e-12), "{base} -> {hit}");
    }
}

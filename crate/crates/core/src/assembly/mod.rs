//! Nonlinear closures and source terms of the reformulated system.

pub mod boundary;
pub mod state;

pub use boundary::{FourierSeries, HelicalBC, EPS_MAX};
pub use state::{FlowField, PerturbationState, StateNorms};

use std::f64::consts::PI;

use crate::background::CoefficientTable;
use crate::error::{Error, Result};
use crate::fields::Field2D;

/// Smallest admissible `|U1 + W1|` before the radial velocity is declared degenerate.
pub const EPS_FLOOR: f64 = 1e-8;

/// Bernoulli bracket `B - |V|^2/2` written with the helical swirl `vc`.
pub fn bracket(r: f64, sigma: f64, v1: f64, vc: f64, v3: f64, b: f64) -> f64 {
    let s2 = sigma * sigma / (4.0 * PI * PI * r * r);
    b - 0.5 * (v1 * v1 + vc * vc / (r * r) + sigma * vc * v3 / (PI * r * r) + (1.0 + s2) * v3 * v3)
}

/// Density from the Bernoulli bracket and entropy.
pub fn density_from_bracket(bracket: f64, a: f64, gamma: f64) -> f64 {
    ((gamma - 1.0) / (a * gamma) * bracket).powf(1.0 / (gamma - 1.0))
}

/// Partial derivatives of the density with respect to `(B, V1, V3, Vc, A)`.
#[allow(clippy::too_many_arguments)]
pub fn density_partials(r: f64, sigma: f64, v1: f64, vc: f64, v3: f64, b: f64, a: f64, gamma: f64) -> [f64; 5] {
    let br = bracket(r, sigma, v1, vc, v3, b);
    let rho = density_from_bracket(br, a, gamma);
    let c2 = (gamma - 1.0) * br;
    let s = rho / c2;
    let s2 = sigma * sigma / (4.0 * PI * PI * r * r);
    let q = sigma / (2.0 * PI * r * r);
    [
        s,
        -s * v1,
        -s * ((1.0 + s2) * v3 + q * vc),
        -s * (vc / (r * r) + q * v3),
        -rho / ((gamma - 1.0) * a),
    ]
}

/// Background quantities at one radius, as needed by the pointwise sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBackground {
    pub r: f64,
    pub u1: f64,
    pub u1_prime: f64,
    pub c2: f64,
    pub kappa2: f64,
    pub b0: f64,
    pub a0: f64,
    pub gamma: f64,
    pub sigma: f64,
}

impl LocalBackground {
    pub fn from_table(t: &CoefficientTable, i: usize) -> Self {
        let p = t.point(i);
        Self {
            r: p.r,
            u1: p.u1,
            u1_prime: t.u1_prime[i],
            c2: p.c2,
            kappa2: t.kappa2,
            b0: t.b0,
            a0: t.a0,
            gamma: t.gamma,
            sigma: t.sigma,
        }
    }

    fn q(&self) -> f64 {
        self.sigma / (2.0 * PI * self.r * self.r)
    }

    fn a(&self) -> f64 {
        1.0 + self.sigma * self.sigma / (4.0 * PI * PI * self.r * self.r)
    }
}

/// Perturbation values and first derivatives at one node.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LocalInputs {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w5: f64,
    pub w1_r: f64,
    pub w1_e: f64,
    pub w3_r: f64,
    pub w3_e: f64,
    pub w2_e: f64,
    pub w4_e: f64,
    pub w5_e: f64,
}

/// `J(W)`: the perturbation of `c^2` beyond its linear radial part.
pub fn j_local(bg: &LocalBackground, x: &LocalInputs) -> f64 {
    let r2 = bg.r * bg.r;
    (bg.gamma - 1.0)
        * (x.w5
            - bg.kappa2 / r2 * x.w2
            - 0.5 * (x.w1 * x.w1 + x.w2 * x.w2 / r2 + bg.a() * x.w3 * x.w3 + bg.sigma / (PI * r2) * x.w2 * x.w3))
}

/// The individual display lines of `G1`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct G1Lines {
    pub swirl_and_cross: f64,
    pub axial_convection: f64,
    pub streamline_bracket: f64,
    pub radial_quadratic: f64,
    pub radial_zeroth: f64,
    pub axial_divergence: f64,
    pub radial_shear: f64,
    pub swirl_coupling: f64,
    pub centrifugal: f64,
}

impl G1Lines {
    pub fn total(&self) -> f64 {
        self.swirl_and_cross
            + self.axial_convection
            + self.streamline_bracket
            + self.radial_quadratic
            + self.radial_zeroth
            + self.axial_divergence
            + self.radial_shear
            + self.swirl_coupling
            + self.centrifugal
    }
}

/// Pointwise `G1`, line by line.
pub fn g1_lines(bg: &LocalBackground, x: &LocalInputs) -> G1Lines {
    let r = bg.r;
    let q = bg.q();
    let a = bg.a();
    let g = bg.gamma;
    let v1 = bg.u1 + x.w1;
    let vc = bg.kappa2 + x.w2;
    let c2w = (g - 1.0) * bracket(r, bg.sigma, v1, vc, x.w3, bg.b0 + x.w5);
    let j = j_local(bg, x);
    let lin = (g - 1.0) * bg.u1 * x.w1 + (g - 1.0) * q * bg.kappa2 * x.w3;
    let u2 = bg.kappa2 / r;
    let v2 = (vc + bg.sigma * x.w3 / (2.0 * PI)) / r;
    G1Lines {
        swirl_and_cross: -q * c2w * x.w2_e + a * v1 * x.w3 * x.w1_e,
        axial_convection: q * a * vc * x.w3 * x.w3_e + a * x.w3 * (v1 * x.w3_r + a * x.w3 * x.w3_e),
        streamline_bracket: q * vc * a * x.w3 * x.w3_e,
        radial_quadratic: bg.u1_prime * x.w1 * x.w1 - bg.u1_prime * j - bg.u1 * j / r
            + ((g + 1.0) * bg.u1 * x.w1 + (g - 1.0) * q * bg.kappa2 * x.w3 + x.w1 * x.w1 - j) * x.w1_r,
        radial_zeroth: x.w1 / r * (lin - j),
        axial_divergence: a * (lin - j) * x.w3_e,
        radial_shear: q * (bg.kappa2 * x.w1 * x.w3_r + v1 * x.w2 * x.w3_r),
        swirl_coupling: q * x.w2 * (v1 * x.w1_e + q * vc * x.w3_e) + q * bg.kappa2 * (x.w1 * x.w1_e + q * x.w2 * x.w3_e),
        centrifugal: -(v1 * v2 * v2 / r
            - bg.u1 * u2 * u2 / r
            - u2 * u2 * x.w1 / r
            - bg.sigma * bg.u1 * u2 * x.w3 / (PI * r * r)),
    }
}

pub fn g1_local(bg: &LocalBackground, x: &LocalInputs) -> f64 {
    g1_lines(bg, x).total()
}

/// Pointwise `G2`; the caller guarantees `U1 + W1 != 0`.
pub fn g2_local(bg: &LocalBackground, x: &LocalInputs) -> f64 {
    let r = bg.r;
    let v1 = bg.u1 + x.w1;
    let vc = bg.kappa2 + x.w2;
    let br = bracket(r, bg.sigma, v1, vc, x.w3, bg.b0 + x.w5);
    (-x.w5_e + (x.w2 + bg.kappa2 + bg.sigma * x.w3 / (2.0 * PI)) / (r * r) * x.w2_e
        + br / (bg.gamma * (bg.a0 + x.w4)) * x.w4_e)
        / v1
}

/// Vacuum guard: the bracket must exceed a tenth of its smallest background value.
pub fn vacuum_threshold(t: &CoefficientTable) -> f64 {
    let min = (0..t.len()).map(|i| t.point(i).c2).fold(f64::INFINITY, f64::min);
    0.1 * min / (t.gamma - 1.0)
}

fn check_table(t: &CoefficientTable, f: &Field2D) {
    assert_eq!(t.len(), f.grid.n_r, "coefficient table and field grid differ");
}

/// Fields entering the sources at the iteration's mixed arguments:
/// `W1`, `W3` from the previous iterate, `W2`, `W4`, `W5` from the current transport.
#[derive(Debug, Clone)]
pub struct MixedInputs {
    pub w: [Field2D; 5],
    pub w1_r: Field2D,
    pub w1_e: Field2D,
    pub w3_r: Field2D,
    pub w3_e: Field2D,
    pub w2_e: Field2D,
    pub w4_e: Field2D,
    pub w5_e: Field2D,
}

impl MixedInputs {
    pub fn new(wbar: &PerturbationState, w2: &Field2D, w4: &Field2D, w5: &Field2D) -> Self {
        let w1 = wbar.w1().clone();
        let w3 = wbar.w3().clone();
        Self {
            w1_r: w1.d_r(),
            w1_e: w1.d_eta(),
            w3_r: w3.d_r(),
            w3_e: w3.d_eta(),
            w2_e: w2.d_eta(),
            w4_e: w4.d_eta(),
            w5_e: w5.d_eta(),
            w: [w1, w2.clone(), w3, w4.clone(), w5.clone()],
        }
    }

    /// Mixed inputs of a single state (all five components from `state`).
    pub fn of_state(state: &PerturbationState) -> Self {
        Self::new(state, state.w2(), state.w4(), state.w5())
    }

    pub fn local(&self, i: usize, j: usize) -> LocalInputs {
        LocalInputs {
            w1: self.w[0].values[[i, j]],
            w2: self.w[1].values[[i, j]],
            w3: self.w[2].values[[i, j]],
            w4: self.w[3].values[[i, j]],
            w5: self.w[4].values[[i, j]],
            w1_r: self.w1_r.values[[i, j]],
            w1_e: self.w1_e.values[[i, j]],
            w3_r: self.w3_r.values[[i, j]],
            w3_e: self.w3_e.values[[i, j]],
            w2_e: self.w2_e.values[[i, j]],
            w4_e: self.w4_e.values[[i, j]],
            w5_e: self.w5_e.values[[i, j]],
        }
    }
}

fn guard_bracket(t: &CoefficientTable, i: usize, eta: f64, br: f64, threshold: f64) -> Result<()> {
    if br > threshold && br.is_finite() {
        Ok(())
    } else {
        Err(Error::VacuumState {
            r: t.r[i],
            eta,
            bracket: br,
            threshold,
        })
    }
}

/// `G1` at the mixed arguments.
pub fn assemble_g1(x: &MixedInputs, t: &CoefficientTable) -> Result<Field2D> {
    let grid = x.w[0].grid;
    check_table(t, &x.w[0]);
    let threshold = vacuum_threshold(t);
    let mut out = Field2D::zeros(grid);
    for i in 0..grid.n_r {
        let bg = LocalBackground::from_table(t, i);
        for j in 0..grid.n_eta {
            let l = x.local(i, j);
            let br = bracket(bg.r, bg.sigma, bg.u1 + l.w1, bg.kappa2 + l.w2, l.w3, bg.b0 + l.w5);
            guard_bracket(t, i, grid.eta(j), br, threshold)?;
            out.values[[i, j]] = g1_local(&bg, &l);
        }
    }
    Ok(out)
}

/// `G2` at the mixed arguments.
pub fn assemble_g2(x: &MixedInputs, t: &CoefficientTable) -> Result<Field2D> {
    let grid = x.w[0].grid;
    check_table(t, &x.w[0]);
    let threshold = vacuum_threshold(t);
    let mut out = Field2D::zeros(grid);
    for i in 0..grid.n_r {
        let bg = LocalBackground::from_table(t, i);
        for j in 0..grid.n_eta {
            let l = x.local(i, j);
            let v1 = bg.u1 + l.w1;
            if v1.abs() < EPS_FLOOR {
                return Err(Error::DegenerateRadialVelocity {
                    r: bg.r,
                    eta: grid.eta(j),
                    value: v1,
                });
            }
            let br = bracket(bg.r, bg.sigma, v1, bg.kappa2 + l.w2, l.w3, bg.b0 + l.w5);
            guard_bracket(t, i, grid.eta(j), br, threshold)?;
            out.values[[i, j]] = g2_local(&bg, &l);
        }
    }
    Ok(out)
}

/// `G3 = G1` plus the terms produced by substituting `Phi1 = W1 + d_eta phi1`, `Phi3 = W3 - d_r phi1`.
pub fn assemble_g3(g1: &Field2D, phi1: &Field2D, t: &CoefficientTable) -> Field2D {
    check_table(t, g1);
    let p_e = phi1.d_eta();
    let p_r = phi1.d_r();
    let p_re = p_e.d_r();
    let p_rr = phi1.d_rr();
    let p_ee = phi1.d_eta2();
    let grid = g1.grid;
    let mut out = g1.clone();
    for i in 0..grid.n_r {
        let m = t.mixed_weight(i);
        let a13 = t.a13[i];
        let e1 = t.e1_full(i);
        let e3 = t.e3_full(i);
        for j in 0..grid.n_eta {
            out.values[[i, j]] += -m * p_re.values[[i, j]] - a13 * (p_rr.values[[i, j]] - p_ee.values[[i, j]])
                + e1 * p_e.values[[i, j]]
                - e3 * p_r.values[[i, j]];
        }
    }
    out
}

fn state_brackets(state: &PerturbationState, t: &CoefficientTable) -> Result<Field2D> {
    let grid = state.grid();
    check_table(t, state.w1());
    let threshold = vacuum_threshold(t);
    let mut out = Field2D::zeros(grid);
    for i in 0..grid.n_r {
        let p = t.point(i);
        for j in 0..grid.n_eta {
            let br = bracket(
                p.r,
                t.sigma,
                p.u1 + state.w1().values[[i, j]],
                t.kappa2 + state.w2().values[[i, j]],
                state.w3().values[[i, j]],
                t.b0 + state.w5().values[[i, j]],
            );
            guard_bracket(t, i, grid.eta(j), br, threshold)?;
            out.values[[i, j]] = br;
        }
    }
    Ok(out)
}

/// Squared sound speed of the perturbed state.
pub fn sound_speed_sq(state: &PerturbationState, t: &CoefficientTable) -> Result<Field2D> {
    let g1 = t.gamma - 1.0;
    Ok(state_brackets(state, t)?.map(|b| g1 * b))
}

/// Density of the perturbed state.
pub fn density(state: &PerturbationState, t: &CoefficientTable) -> Result<Field2D> {
    let br = state_brackets(state, t)?;
    let a = state.w4().map(|w| t.a0 + w);
    Ok(br.zip_with(&a, |b, a| density_from_bracket(b, a, t.gamma)))
}

/// Physical flow corresponding to the perturbation `state`.
pub fn reconstruct_flow(state: &PerturbationState, t: &CoefficientTable) -> Result<FlowField> {
    let grid = state.grid();
    let rho = density(state, t)?;
    let g = t.gamma;
    let k = t.sigma / (2.0 * PI);
    let mut v1 = Field2D::zeros(grid);
    let mut v2 = Field2D::zeros(grid);
    let mut a = Field2D::zeros(grid);
    let mut b = Field2D::zeros(grid);
    let mut p = Field2D::zeros(grid);
    let mut mach = Field2D::zeros(grid);
    let v3 = state.w3().clone();
    for i in 0..grid.n_r {
        let bp = t.point(i);
        let r = bp.r;
        for j in 0..grid.n_eta {
            let vv1 = bp.u1 + state.w1().values[[i, j]];
            let vc = t.kappa2 + state.w2().values[[i, j]];
            let vv3 = v3.values[[i, j]];
            let vv2 = (vc + k * vv3) / r;
            let aa = t.a0 + state.w4().values[[i, j]];
            let rr = rho.values[[i, j]];
            let pp = aa * rr.powf(g);
            v1.values[[i, j]] = vv1;
            v2.values[[i, j]] = vv2;
            a.values[[i, j]] = aa;
            b.values[[i, j]] = t.b0 + state.w5().values[[i, j]];
            p.values[[i, j]] = pp;
            mach.values[[i, j]] = ((vv1 * vv1 + vv2 * vv2 + vv3 * vv3) * rr / (g * pp)).sqrt();
        }
    }
    Ok(FlowField {
        v1,
        v2,
        v3,
        rho,
        p,
        a,
        b,
        mach,
        sigma: t.sigma,
        gamma: g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{coefficient_table, reference_inflow, solve_background};
    use crate::fields::AnnulusGrid;

    fn setup(n_r: usize) -> (CoefficientTable, AnnulusGrid) {
        let bg = solve_background(reference_inflow(), n_r).unwrap();
        let t = coefficient_table(&bg, 4.0).unwrap();
        let grid = AnnulusGrid::new(bg.r[0], bg.inflow.r1, n_r, 4.0, 16).unwrap();
        (t, grid)
    }

    #[test]
    fn zero_state_reproduces_background() {
        let (t, grid) = setup(64);
        let z = PerturbationState::zeros(grid);
        let c2 = sound_speed_sq(&z, &t).unwrap();
        let rho = density(&z, &t).unwrap();
        for i in 0..grid.n_r {
            let p = t.point(i);
            for j in 0..grid.n_eta {
                assert!((c2.values[[i, j]] - p.c2).abs() < 1e-12 * p.c2);
                assert!((rho.values[[i, j]] - p.rho).abs() < 1e-12 * p.rho);
            }
        }
        let x = MixedInputs::of_state(&z);
        assert_eq!(assemble_g1(&x, &t).unwrap().max_abs(), 0.0);
        assert_eq!(assemble_g2(&x, &t).unwrap().max_abs(), 0.0);
        let flow = reconstruct_flow(&z, &t).unwrap();
        for i in 0..grid.n_r {
            let p = t.point(i);
            assert!((flow.v2.values[[i, 0]] - p.u2).abs() < 1e-15);
            assert_eq!(flow.v3.values[[i, 3]], 0.0);
        }
    }

    #[test]
    fn vacuum_is_detected() {
        let (t, grid) = setup(32);
        let mut s = PerturbationState::zeros(grid);
        s.w[4].values[[5, 5]] = -1e3;
        assert!(matches!(sound_speed_sq(&s, &t), Err(Error::VacuumState { .. })));
        assert!(matches!(reconstruct_flow(&s, &t), Err(Error::VacuumState { .. })));
    }

    #[test]
    fn g3_equals_g1_for_zero_potential() {
        let (t, grid) = setup(32);
        let g1 = Field2D::from_fn(grid, |r, e| r * e.sin());
        let g3 = assemble_g3(&g1, &Field2D::zeros(grid), &t);
        assert_eq!(g3, g1);
    }
}

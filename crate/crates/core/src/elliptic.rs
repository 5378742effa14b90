//! Linear elliptic solves of the iteration: the Poisson problem for the curl
//! potential `phi1` and the variable-coefficient potential equation for `phi`.
//!
//! Coefficients depend on `r` only, so both problems decouple into one complex
//! two-point boundary value problem per Fourier mode, discretized with
//! second-order differences and solved with the Thomas algorithm.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::assembly::HelicalBC;
use crate::background::CoefficientTable;
use crate::error::{Error, Result};
use crate::fields::{AnnulusGrid, Field2D};
use crate::linalg::solve_tridiagonal;
use ndarray::Array2;

/// Relative pivot size below which a mode system is declared singular.
pub const PIVOT_FLOOR: f64 = 1e-14;

/// Tolerance on the mean of `q3`.
pub const ZERO_MEAN_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tridiagonal system of a single Fourier mode over the radial grid.
#[derive(Debug, Clone)]
pub struct ModeSystem {
    pub mode: usize,
    pub omega: f64,
    pub lower: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub upper: Vec<Complex64>,
    pub rhs: Vec<Complex64>,
}

impl ModeSystem {
    /// Interior rows of `u'' + p u' + q u = g` on a uniform grid; the first and last rows are left for boundary conditions.
    fn interior(mode: usize, omega: f64, h: f64, p: &[f64], q: &[Complex64], g: Vec<Complex64>) -> Self {
        let n = g.len();
        let inv_h2 = 1.0 / (h * h);
        let mut lower = vec![ZERO; n];
        let mut diag = vec![ZERO; n];
        let mut upper = vec![ZERO; n];
        for i in 1..n - 1 {
            let half = p[i] / (2.0 * h);
            lower[i] = Complex64::new(inv_h2 - half, 0.0);
            diag[i] = Complex64::new(-2.0 * inv_h2, 0.0) + q[i];
            upper[i] = Complex64::new(inv_h2 + half, 0.0);
        }
        Self {
            mode,
            omega,
            lower,
            diag,
            upper,
            rhs: g,
        }
    }

    fn dirichlet_inner(&mut self, value: Complex64) {
        self.diag[0] = Complex64::new(1.0, 0.0);
        self.upper[0] = ZERO;
        self.rhs[0] = value;
    }

    fn dirichlet_outer(&mut self, value: Complex64) {
        let n = self.diag.len();
        self.lower[n - 1] = ZERO;
        self.diag[n - 1] = Complex64::new(1.0, 0.0);
        self.rhs[n - 1] = value;
    }

    /// `u'(r0) + beta u(r0) = d` with the one-sided stencil `(-3 u0 + 4 u1 - u2)/(2h)`, `u2` eliminated through row 1.
    fn robin_inner(&mut self, h: f64, beta: Complex64, d: Complex64) {
        let (a1, b1, c1, g1) = (self.lower[1], self.diag[1], self.upper[1], self.rhs[1]);
        let s = c1 * (2.0 * h);
        self.diag[0] = Complex64::new(-3.0 / (2.0 * h), 0.0) + beta + a1 / s;
        self.upper[0] = Complex64::new(2.0 / h, 0.0) + b1 / s;
        self.rhs[0] = d + g1 / s;
    }

    /// `u'(r1) = d` with `(3 u_{n-1} - 4 u_{n-2} + u_{n-3})/(2h)`, `u_{n-3}` eliminated through row `n-2`.
    fn neumann_outer(&mut self, h: f64, d: Complex64) {
        let n = self.diag.len();
        let (a, b, c, g) = (self.lower[n - 2], self.diag[n - 2], self.upper[n - 2], self.rhs[n - 2]);
        let s = a * (2.0 * h);
        self.diag[n - 1] = Complex64::new(3.0 / (2.0 * h), 0.0) - c / s;
        self.lower[n - 1] = Complex64::new(-2.0 / h, 0.0) - b / s;
        self.rhs[n - 1] = d - g / s;
    }

    pub fn solve(mut self) -> Result<Vec<Complex64>> {
        let mode = self.mode;
        solve_tridiagonal(&self.lower, &self.diag, &self.upper, &mut self.rhs, PIVOT_FLOOR)
            .map_err(|row| Error::SingularMode { mode, row })?;
        Ok(self.rhs)
    }
}

fn columns(spec: &Array2<Complex64>) -> Vec<Vec<Complex64>> {
    (0..spec.ncols()).map(|k| spec.column(k).to_vec()).collect()
}

fn from_columns(grid: AnnulusGrid, cols: Vec<Vec<Complex64>>) -> Field2D {
    let mut spec = Array2::<Complex64>::zeros((grid.n_r, cols.len()));
    for (k, col) in cols.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate() {
            spec[[i, k]] = v;
        }
    }
    Field2D::from_spectrum(grid, &spec)
}

/// Solves `(d_r^2 + d_eta^2) phi1 = g2` with `phi1(r0) = 0`, `d_r phi1(r1) = 0`.
pub fn solve_poisson(g2: &Field2D) -> Result<Field2D> {
    let grid = g2.grid;
    if !g2.is_finite() {
        return Err(Error::invalid("G2", "source is not finite"));
    }
    let h = grid.h_r();
    let p = vec![0.0; grid.n_r];
    let cols = columns(&g2.spectrum());
    let solved = cols
        .into_par_iter()
        .enumerate()
        .map(|(k, g)| {
            let w = grid.omega(k);
            let q = vec![Complex64::new(-w * w, 0.0); grid.n_r];
            let mut sys = ModeSystem::interior(k, w, h, &p, &q, g);
            sys.dirichlet_inner(ZERO);
            sys.neumann_outer(h, ZERO);
            sys.solve()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(from_columns(grid, solved))
}

/// Max-norm of `(d_r^2 + d_eta^2) phi1 - g2` over interior rows, with the solver's own stencils.
pub fn poisson_residual(phi1: &Field2D, g2: &Field2D) -> f64 {
    let lap = &phi1.d_rr() + &phi1.d_eta2();
    let n = phi1.grid.n_r;
    let mut m = 0.0_f64;
    for i in 1..n - 1 {
        for j in 0..phi1.grid.n_eta {
            m = m.max((lap.values[[i, j]] - g2.values[[i, j]]).abs());
        }
    }
    m
}

/// Potential `phi` together with its sheared representation `phi_hat(y1, y2) = phi(y1, y2 - f(y1))`.
#[derive(Debug, Clone)]
pub struct PotentialSolution {
    pub phi_hat: Field2D,
    pub phi: Field2D,
    pub f: Vec<f64>,
    pub f_prime: Vec<f64>,
}

impl PotentialSolution {
    /// `d_r phi = (d_y1 phi_hat + f' d_y2 phi_hat)(r, f(r) + eta)`.
    pub fn d_r_phi(&self) -> Field2D {
        let d1 = self.phi_hat.d_r4();
        let d2 = self.phi_hat.d_eta();
        let mut chain = d1;
        for i in 0..chain.grid.n_r {
            let fp = self.f_prime[i];
            for j in 0..chain.grid.n_eta {
                chain.values[[i, j]] += fp * d2.values[[i, j]];
            }
        }
        chain.shift_rows(&self.f)
    }

    pub fn d_eta_phi(&self) -> Field2D {
        self.phi.d_eta()
    }
}

/// Checks the preconditions of [`solve_potential`] that do not depend on the source.
pub fn check_potential_data(grid: AnnulusGrid, t: &CoefficientTable, bc: &HelicalBC) -> Result<()> {
    let (min_k22, r) = t.min_k22();
    if !(min_k22 > 0.0) {
        return Err(Error::NotElliptic { min_k22, r });
    }
    let mean = bc.q3.mean();
    if mean.abs() > ZERO_MEAN_TOL {
        return Err(Error::ZeroMeanViolation { mean });
    }
    if bc.n_max() >= grid.n_eta / 2 {
        return Err(Error::invalid(
            "boundary",
            format!("mode {} is not resolved by N_eta = {}", bc.n_max(), grid.n_eta),
        ));
    }
    Ok(())
}

/// Half-spectrum coefficients in `y2` of the outer Dirichlet datum `eps Q(y2 - f1)`, `Q(x) = int_0^x q3`.
pub fn outer_dirichlet_modes(bc: &HelicalBC, grid: AnnulusGrid, f1: f64) -> Vec<Complex64> {
    let m = grid.n_modes();
    let mut out = vec![ZERO; m];
    let mut constant = 0.0;
    for (k, slot) in out.iter_mut().enumerate().take(bc.q3.n_max() + 1).skip(1) {
        let w = grid.omega(k);
        let base = bc.q3.coeff(k) / Complex64::new(0.0, w);
        constant -= 2.0 * base.re;
        *slot = bc.eps * base * Complex64::from_polar(1.0, -w * f1);
    }
    out[0] = Complex64::new(bc.eps * constant, 0.0);
    out
}

/// Solves the potential equation in sheared coordinates and maps the result back.
///
/// The Nyquist mode of `phi_hat` is set to zero: its first `y2`-derivative is
/// not representable on the grid.
pub fn solve_potential(g3: &Field2D, t: &CoefficientTable, bc: &HelicalBC) -> Result<PotentialSolution> {
    let grid = g3.grid;
    assert_eq!(t.len(), grid.n_r, "coefficient table and field grid differ");
    check_potential_data(grid, t, bc)?;
    if !g3.is_finite() {
        return Err(Error::invalid("G3", "source is not finite"));
    }
    let n = grid.n_r;
    let h = grid.h_r();
    let neg_f: Vec<f64> = t.f.iter().map(|v| -v).collect();
    let g_hat = Field2D::from_values(
        grid,
        Array2::from_shape_fn((n, grid.n_eta), |(i, j)| g3.values[[i, j]] / t.a11[i]),
    )
    .shift_rows(&neg_f);
    let dirichlet = outer_dirichlet_modes(bc, grid, t.f[n - 1]);
    let half = grid.n_eta / 2;
    let cols = columns(&g_hat.spectrum());
    let solved = cols
        .into_par_iter()
        .enumerate()
        .map(|(k, g)| {
            if k == half {
                return Ok(vec![ZERO; n]);
            }
            let w = grid.omega(k);
            let iw = Complex64::new(0.0, w);
            let q: Vec<Complex64> = (0..n).map(|i| iw * t.k2_full[i] - w * w * t.k22[i]).collect();
            let mut sys = ModeSystem::interior(k, w, h, &t.k1_full, &q, g);
            sys.robin_inner(h, iw * t.f_prime[0], bc.q1.coeff(k) * bc.eps);
            sys.dirichlet_outer(dirichlet[k]);
            sys.solve()
        })
        .collect::<Result<Vec<_>>>()?;
    let phi_hat = from_columns(grid, solved);
    let phi = phi_hat.shift_rows(&t.f);
    Ok(PotentialSolution {
        phi_hat,
        phi,
        f: t.f.clone(),
        f_prime: t.f_prime.clone(),
    })
}

/// Residual of the potential equation assembled directly in `(r, eta)` with
/// second-order stencils, `A11 phi_rr + 2 A13 phi_r,eta + A33 phi_eta,eta + e1 phi_r + e3 phi_eta - G3`,
/// using the full `e1`, `e3`. Interior rows only; walls are zero.
pub fn potential_residual_direct(phi: &Field2D, g3: &Field2D, t: &CoefficientTable) -> Field2D {
    let grid = phi.grid;
    let pr = phi.d_r();
    let prr = phi.d_rr();
    let pe = phi.d_eta();
    let pre = pe.d_r();
    let pee = phi.d_eta2();
    let mut out = Field2D::zeros(grid);
    for i in 1..grid.n_r - 1 {
        for j in 0..grid.n_eta {
            out.values[[i, j]] = t.a11[i] * prr.values[[i, j]]
                + 2.0 * t.a13[i] * pre.values[[i, j]]
                + t.a33[i] * pee.values[[i, j]]
                + t.e1_full(i) * pr.values[[i, j]]
                + t.e3_full(i) * pe.values[[i, j]]
                - g3.values[[i, j]];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::FourierSeries;
    use crate::background::{coefficient_table, reference_inflow, solve_background};
    use std::f64::consts::PI;

    fn grid(n_r: usize) -> AnnulusGrid {
        AnnulusGrid::new(1.06, 2.0, n_r, 4.0, 16).unwrap()
    }

    fn zero_bc(sigma: f64) -> HelicalBC {
        HelicalBC {
            sigma,
            eps: 1e-3,
            qc: FourierSeries::zero(),
            q1: FourierSeries::zero(),
            q3: FourierSeries::zero(),
            a_tilde: FourierSeries::zero(),
            b_tilde: FourierSeries::zero(),
        }
    }

    #[test]
    fn poisson_homogeneous_is_zero() {
        let g = grid(33);
        let phi = solve_poisson(&Field2D::zeros(g)).unwrap();
        assert_eq!(phi.max_abs(), 0.0);
    }

    #[test]
    fn poisson_stencil_residual_is_roundoff() {
        let g = grid(65);
        let src = Field2D::from_fn(g, |r, e| (r * r).sin() + (2.0 * PI * e / 4.0).cos() * r + (6.0 * PI * e / 4.0).sin());
        let phi = solve_poisson(&src).unwrap();
        let res = poisson_residual(&phi, &src);
        assert!(res < 1e-11 * src.max_abs().max(1.0), "{res}");
        let n = g.n_r;
        for j in 0..g.n_eta {
            assert!(phi.values[[0, j]].abs() < 1e-14);
            let d = (3.0 * phi.values[[n - 1, j]] - 4.0 * phi.values[[n - 2, j]] + phi.values[[n - 3, j]]) / (2.0 * g.h_r());
            assert!(d.abs() < 1e-10);
        }
    }

    #[test]
    fn single_cosine_source_has_zero_mean_rows() {
        let g = grid(33);
        let src = Field2D::from_fn(g, |_, e| (2.0 * PI * e / 4.0).cos());
        let phi = solve_poisson(&src).unwrap();
        assert!(phi.row_means().iter().all(|m| m.abs() < 1e-15));
    }

    #[test]
    fn outer_datum_matches_antiderivative() {
        let g = grid(33);
        let mut bc = zero_bc(4.0);
        bc.eps = 1.0;
        bc.q3 = FourierSeries {
            cos: vec![0.0, 0.3, -0.2],
            sin: vec![0.0, 0.7, 0.1],
        };
        let f1 = 0.37;
        let modes = outer_dirichlet_modes(&bc, g, f1);
        for j in 0..g.n_eta {
            let y = g.eta(j);
            let mut v = modes[0].re;
            for (k, c) in modes.iter().enumerate().skip(1) {
                v += 2.0 * (c * Complex64::from_polar(1.0, g.omega(k) * y)).re;
            }
            let exact = bc.q3.antiderivative(y - f1, 4.0);
            assert!((v - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn potential_homogeneous_and_validation() {
        let bg = solve_background(reference_inflow(), 65).unwrap();
        let sigma = 4.0;
        let t = coefficient_table(&bg, sigma).unwrap();
        let g = AnnulusGrid::new(bg.r[0], bg.r[64], 65, sigma, 16).unwrap();
        let sol = solve_potential(&Field2D::zeros(g), &t, &zero_bc(sigma)).unwrap();
        assert_eq!(sol.phi.max_abs(), 0.0);
        let mut bad = zero_bc(sigma);
        bad.q3 = FourierSeries::single(0, 1e-6, 0.0);
        assert!(matches!(
            solve_potential(&Field2D::zeros(g), &t, &bad),
            Err(Error::ZeroMeanViolation { .. })
        ));
        let big = coefficient_table(&bg, 1.01 * t.sigma_star().unwrap()).unwrap();
        assert!(matches!(
            solve_potential(&Field2D::zeros(g), &big, &zero_bc(sigma)),
            Err(Error::NotElliptic { .. })
        ));
    }
}

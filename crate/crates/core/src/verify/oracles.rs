//! Independent oracles for the transport stage.

use std::f64::consts::PI;

use crate::assembly::{FourierSeries, HelicalBC, PerturbationState};
use crate::background::BackgroundFlow;
use crate::error::Result;
use crate::fields::Field2D;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Exit abscissa of the characteristic through `(r, eta)` for `W = 0`, by
/// quadrature of `sigma kappa2 / (2 pi tau^2 U1(tau))` from `r` to `r1`.
pub fn unperturbed_exit_eta(bg: &BackgroundFlow, sigma: f64, r: f64, eta: f64, tol: f64) -> f64 {
    let k2 = bg.kappa2;
    let slope = |tau: f64| {
        let u1 = bg.state_at(tau).map(|p| p.u1).unwrap_or(f64::NAN);
        sigma * k2 / (2.0 * PI * tau * tau * u1)
    };
    eta + adaptive_simpson(&slope, r, bg.inflow.r1, tol)
}

fn periodic_linear(row: &[f64], h: f64, x: f64) -> f64 {
    let n = row.len();
    let s = x / h;
    let fl = s.floor();
    let t = s - fl;
    let i = (fl as i64).rem_euclid(n as i64) as usize;
    row[i] * (1.0 - t) + row[(i + 1) % n] * t
}

/// First-order upwind (semi-Lagrangian, linear interpolation) march of the
/// three transport problems from `r1` inward. Returns `(W2, W4, W5)`.
pub fn upwind_transport(wbar: &PerturbationState, bc: &HelicalBC, bg: &BackgroundFlow) -> Result<[Field2D; 3]> {
    let g = wbar.grid();
    let sigma = g.sigma;
    let n = g.n_r;
    let he = g.h_eta();
    let data: [&FourierSeries; 3] = [&bc.qc, &bc.a_tilde, &bc.b_tilde];
    let mut out: [Field2D; 3] = std::array::from_fn(|_| Field2D::zeros(g));
    for (f, s) in out.iter_mut().zip(data) {
        for j in 0..g.n_eta {
            f.values[[n - 1, j]] = bc.eps * s.eval(g.eta(j), sigma);
        }
    }
    for i in (0..n - 1).rev() {
        let r = g.r(i);
        let u1 = bg.state_at(r)?.u1;
        let q = sigma / (2.0 * PI * r * r);
        let a = 1.0 + q * sigma / (2.0 * PI);
        let h = g.r(i + 1) - r;
        let upstream: Vec<Vec<f64>> = out.iter().map(|f| f.values.row(i + 1).to_vec()).collect();
        for j in 0..g.n_eta {
            let num = q * (wbar.w2().values[[i, j]] + bg.kappa2) + a * wbar.w3().values[[i, j]];
            let den = wbar.w1().values[[i, j]] + u1;
            let foot = g.eta(j) + h * num / den;
            for (f, row) in out.iter_mut().zip(&upstream) {
                f.values[[i, j]] = periodic_linear(row, he, foot);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 1.0, 1e-12);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn periodic_interpolation_wraps() {
        let row = [0.0, 1.0, 2.0, 3.0];
        assert!((periodic_linear(&row, 1.0, 3.5) - 1.5).abs() < 1e-15);
        assert!((periodic_linear(&row, 1.0, -0.5) - 1.5).abs() < 1e-15);
    }
}

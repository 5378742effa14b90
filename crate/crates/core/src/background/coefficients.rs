//! Linearization coefficients of the reformulated first-order system.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use super::critical::{critical_step, CriticalStep};
use super::{BackgroundFlow, BackgroundPoint};
use crate::error::{Error, Result};
use crate::fields::spline::UniformSpline;
use crate::io::fmt_g17;

/// Coefficient profiles for one helical step `sigma`, tabulated on the background grid.
///
/// `e1`, `e3`, `k1`, `k2` follow the printed definitions. The linearization
/// of the continuity equation additionally carries centrifugal contributions
/// `e1_cf = U2^2/r` and `e3_cf = sigma U1 U2/(pi r^2)`; `k1_full`, `k2_full`
/// are the transformed coefficients with those included and are what the
/// potential solve uses.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientTable {
    pub sigma: f64,
    pub gamma: f64,
    pub kappa2: f64,
    pub b0: f64,
    pub a0: f64,
    pub r: Vec<f64>,
    pub a11: Vec<f64>,
    pub a13: Vec<f64>,
    pub a33: Vec<f64>,
    pub e1: Vec<f64>,
    pub e3: Vec<f64>,
    pub e1_cf: Vec<f64>,
    pub e3_cf: Vec<f64>,
    pub u1_prime: Vec<f64>,
    pub f: Vec<f64>,
    pub f_prime: Vec<f64>,
    pub f_second: Vec<f64>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub k22: Vec<f64>,
    pub k1_full: Vec<f64>,
    pub k2_full: Vec<f64>,
    pub critical: Option<CriticalStep>,
    #[serde(skip)]
    points: Vec<BackgroundPoint>,
}

struct Local {
    a11: f64,
    a13: f64,
    a33: f64,
    e1: f64,
    e3: f64,
    e1_cf: f64,
    e3_cf: f64,
    u1_prime: f64,
    f_prime: f64,
    f_second: f64,
}

fn local(p: &BackgroundPoint, sigma: f64, gamma: f64, kappa2: f64) -> Local {
    let r = p.r;
    let s2 = sigma * sigma / (4.0 * PI * PI * r * r);
    let u1p = p.u1_prime();
    let a11 = p.c2 - p.u1 * p.u1;
    let a13 = -sigma / (2.0 * PI * r) * p.u1 * p.u2;
    let a33 = (1.0 + s2) * p.c2 - s2 * p.u2 * p.u2;
    let e1 = p.c2 / r - (gamma + 1.0) * p.u1 * u1p - (gamma - 1.0) * p.u1 * p.u1 / r;
    let e3 = -(gamma - 1.0) * sigma * kappa2 / (2.0 * PI * r * r) * (p.u1 / r + u1p);
    let e1_cf = p.u2 * p.u2 / r;
    let e3_cf = sigma * p.u1 * p.u2 / (PI * r * r);
    let f_prime = -a13 / a11;
    let c2p = (gamma - 1.0) * p.c2 * p.rho_prime() / p.rho;
    let a11p = c2p - 2.0 * p.u1 * u1p;
    let num = p.u1 * kappa2 / r;
    let num_p = kappa2 * (u1p / r - p.u1 / (r * r));
    let den = r * a11;
    let den_p = a11 + r * a11p;
    let f_second = sigma / (2.0 * PI) * (num_p * den - num * den_p) / (den * den);
    Local {
        a11,
        a13,
        a33,
        e1,
        e3,
        e1_cf,
        e3_cf,
        u1_prime: u1p,
        f_prime,
        f_second,
    }
}

/// Tabulates all coefficient profiles for step `sigma` (`sigma = 0` is allowed as a diagnostic).
pub fn coefficient_table(bg: &BackgroundFlow, sigma: f64) -> Result<CoefficientTable> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid("helical.sigma", format!("need sigma >= 0, got {sigma}")));
    }
    let n = bg.len();
    let gamma = bg.gamma();
    let kappa2 = bg.kappa2;
    let points: Vec<BackgroundPoint> = (0..n).map(|i| bg.point(i)).collect();
    let locals: Vec<Local> = points.iter().map(|p| local(p, sigma, gamma, kappa2)).collect();
    let mut f = vec![0.0; n];
    for i in 0..n - 1 {
        let mid = bg.state_at(0.5 * (bg.r[i] + bg.r[i + 1]))?;
        let fm = local(&mid, sigma, gamma, kappa2).f_prime;
        let h = bg.r[i + 1] - bg.r[i];
        f[i + 1] = f[i] + h / 6.0 * (locals[i].f_prime + 4.0 * fm + locals[i + 1].f_prime);
    }
    let col = |g: fn(&Local) -> f64| locals.iter().map(g).collect::<Vec<f64>>();
    let a11 = col(|l| l.a11);
    let a13 = col(|l| l.a13);
    let a33 = col(|l| l.a33);
    let e1 = col(|l| l.e1);
    let e3 = col(|l| l.e3);
    let e1_cf = col(|l| l.e1_cf);
    let e3_cf = col(|l| l.e3_cf);
    let f_prime = col(|l| l.f_prime);
    let f_second = col(|l| l.f_second);
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k22 = vec![0.0; n];
    let mut k1_full = vec![0.0; n];
    let mut k2_full = vec![0.0; n];
    for i in 0..n {
        let fp = f_prime[i];
        k1[i] = e1[i] / a11[i];
        k2[i] = f_second[i] + (e1[i] * fp + e3[i]) / a11[i];
        k22[i] = (a33[i] + 2.0 * a13[i] * fp) / a11[i] + fp * fp;
        let e1f = e1[i] + e1_cf[i];
        let e3f = e3[i] + e3_cf[i];
        k1_full[i] = e1f / a11[i];
        k2_full[i] = f_second[i] + (e1f * fp + e3f) / a11[i];
    }
    let critical = match critical_step(bg) {
        Ok(c) => Some(c),
        Err(Error::NoSupersonicRegion) => None,
        Err(e) => return Err(e),
    };
    Ok(CoefficientTable {
        sigma,
        gamma,
        kappa2,
        b0: bg.b0,
        a0: bg.a0(),
        r: bg.r.clone(),
        a11,
        a13,
        a33,
        e1,
        e3,
        e1_cf,
        e3_cf,
        u1_prime: col(|l| l.u1_prime),
        f,
        f_prime,
        f_second,
        k1,
        k2,
        k22,
        k1_full,
        k2_full,
        critical,
        points,
    })
}

impl CoefficientTable {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn point(&self, i: usize) -> &BackgroundPoint {
        &self.points[i]
    }

    pub fn sigma_star(&self) -> Option<f64> {
        self.critical.map(|c| c.sigma_star)
    }

    pub fn e1_full(&self, i: usize) -> f64 {
        self.e1[i] + self.e1_cf[i]
    }

    pub fn e3_full(&self, i: usize) -> f64 {
        self.e3[i] + self.e3_cf[i]
    }

    /// Coefficient of the mixed derivative correction in `G3`,
    /// `U1^2 + sigma^2/(4 pi^2 r^2) (c^2 - U2^2)`.
    pub fn mixed_weight(&self, i: usize) -> f64 {
        let p = &self.points[i];
        let s2 = self.sigma * self.sigma / (4.0 * PI * PI * p.r * p.r);
        p.u1 * p.u1 + s2 * (p.c2 - p.u2 * p.u2)
    }

    /// Minimum of `k22` over the nodes and the radius where it occurs.
    pub fn min_k22(&self) -> (f64, f64) {
        self.k22
            .iter()
            .zip(&self.r)
            .fold((f64::INFINITY, f64::NAN), |acc, (&k, &r)| if k < acc.0 { (k, r) } else { acc })
    }

    /// Writes one `r,rho,U1,U2,c2,M1sq,M2sq,A11,A13,A33,e1,e3,f,k1,k2,k22` row per node.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "r,rho,U1,U2,c2,M1sq,M2sq,A11,A13,A33,e1,e3,f,k1,k2,k22")?;
        for (i, p) in self.points.iter().enumerate() {
            let row = [
                p.r,
                p.rho,
                p.u1,
                p.u2,
                p.c2,
                p.m1_sq,
                p.m2_sq,
                self.a11[i],
                self.a13[i],
                self.a33[i],
                self.e1[i],
                self.e3[i],
                self.f[i],
                self.k1[i],
                self.k2[i],
                self.k22[i],
            ];
            let line: Vec<String> = row.iter().map(|&v| fmt_g17(v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Cubic-spline interpolant of `f` for off-grid radii.
    pub fn f_spline(&self) -> UniformSpline<f64> {
        let h = (self.r[self.len() - 1] - self.r[0]) / (self.len() - 1) as f64;
        UniformSpline::new(self.r[0], h, self.f.clone())
    }

    /// Closed form of `k2` in terms of Mach numbers.
    pub fn k2_closed(&self, i: usize) -> f64 {
        let p = &self.points[i];
        let d = 1.0 - p.m1_sq;
        -self.sigma / (2.0 * PI * p.r * p.r) * p.m1m2() * (2.0 - 2.0 * p.m1_sq + p.m2_sq) / (d * d)
    }

    /// Closed form of `k22` in terms of Mach numbers.
    pub fn k22_closed(&self, i: usize) -> f64 {
        let p = &self.points[i];
        let d = 1.0 - p.m1_sq;
        1.0 / d + self.sigma * self.sigma / (4.0 * PI * PI * p.r * p.r) * (1.0 - p.mach_sq()) / (d * d)
    }

    /// `k22` as the normalized determinant `(A11 A33 - A13^2)/A11^2`.
    pub fn k22_determinant(&self, i: usize) -> f64 {
        (self.a11[i] * self.a33[i] - self.a13[i] * self.a13[i]) / (self.a11[i] * self.a11[i])
    }

    /// Alternative form of `e1` with `U1'` eliminated.
    pub fn e1_alt(&self, i: usize) -> f64 {
        let p = &self.points[i];
        let g = self.gamma;
        p.c2 / p.r + (g + 1.0) * (1.0 + p.m2_sq) / (p.r * (1.0 - p.m1_sq)) * p.u1 * p.u1
            - (g - 1.0) / p.r * p.u1 * p.u1
    }

    /// Alternative form of `e3` with `U1'` eliminated.
    pub fn e3_alt(&self, i: usize) -> f64 {
        let p = &self.points[i];
        (self.gamma - 1.0) * self.sigma / (2.0 * PI * p.r * p.r) * p.mach_sq() / (1.0 - p.m1_sq) * p.u1 * p.u2
    }

    /// Closed form of `k1` in terms of Mach numbers.
    pub fn k1_closed(&self, i: usize) -> f64 {
        let p = &self.points[i];
        let d = 1.0 - p.m1_sq;
        (1.0 + 2.0 * p.m1_sq + (self.gamma + 1.0) * p.m1_sq * p.mach_sq() / d) / (p.r * d)
    }

    /// Alternative form of `A33` written with Mach numbers.
    pub fn a33_alt(&self, i: usize) -> f64 {
        let p = &self.points[i];
        let s2 = self.sigma * self.sigma / (4.0 * PI * PI * p.r * p.r);
        p.c2 * (1.0 + s2 * (1.0 - p.m2_sq))
    }

    /// Transformed cross coefficient `(A13 + A11 f')/A11`, zero by construction of `f`.
    pub fn k12(&self, i: usize) -> f64 {
        (self.a13[i] + self.a11[i] * self.f_prime[i]) / self.a11[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{reference_inflow, solve_background};

    #[test]
    fn sigma_zero_diagnostic() {
        let bg = solve_background(reference_inflow(), 128).unwrap();
        let t = coefficient_table(&bg, 0.0).unwrap();
        for i in 0..t.len() {
            assert_eq!(t.a13[i], 0.0);
            assert_eq!(t.f[i], 0.0);
            let expect = 1.0 / (1.0 - bg.m1_sq[i]);
            assert!((t.k22[i] - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let bg = solve_background(reference_inflow(), 17).unwrap();
        let t = coefficient_table(&bg, 3.0).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 18);
        assert!(lines.iter().all(|l| l.split(',').count() == 16));
        assert_eq!(lines[1].split(',').next().unwrap().parse::<f64>().unwrap(), t.r[0]);
    }

    #[test]
    fn full_k2_vanishes() {
        let bg = solve_background(reference_inflow(), 256).unwrap();
        let t = coefficient_table(&bg, 3.0).unwrap();
        for i in 0..t.len() {
            assert!(t.k2_full[i].abs() < 1e-12, "k2_full[{i}] = {}", t.k2_full[i]);
        }
    }

    #[test]
    fn f_prime_matches_simpson_slope() {
        let bg = solve_background(reference_inflow(), 256).unwrap();
        let t = coefficient_table(&bg, 3.0).unwrap();
        assert_eq!(t.f[0], 0.0);
        let s = t.f_spline();
        for i in [50, 128, 200] {
            let err = (s.eval_deriv(t.r[i]) - t.f_prime[i]).abs();
            assert!(err < 1e-6 * t.f_prime[i].abs().max(1.0), "node {i}: {err}");
        }
    }
}

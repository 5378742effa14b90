//! Cylindrically symmetric transonic background flow and its linearization coefficients.

mod coefficients;
mod critical;

pub use coefficients::{coefficient_table, CoefficientTable};
pub use critical::{critical_step, find_sonic_radius, sonic_radius_closed_form, CriticalStep};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Margin below `M1^2 = 1` at which the radial ODE is declared degenerate.
pub const SONIC_MARGIN: f64 = 1e-4;

/// Default number of radial nodes for background tabulation.
pub const DEFAULT_N_R: usize = 1024;

/// Largest RK4 step; cells wider than this are integrated with substeps.
pub const MAX_SUBSTEP: f64 = 2.5e-4;

/// Gas constants and the inflow state on the outer cylinder `r = r1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasInflow {
    pub gamma: f64,
    pub a0: f64,
    pub rho0: f64,
    pub u10: f64,
    pub u20: f64,
    pub r0: f64,
    pub r1: f64,
}

impl GasInflow {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.gamma, self.a0, self.rho0, self.u10, self.u20, self.r0, self.r1]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::invalid("inflow", "all parameters must be finite"));
        }
        if self.gamma <= 1.0 {
            return Err(Error::invalid("gas.gamma", format!("need gamma > 1, got {}", self.gamma)));
        }
        if self.a0 <= 0.0 {
            return Err(Error::invalid("gas.A0", format!("need A0 > 0, got {}", self.a0)));
        }
        if self.rho0 <= 0.0 {
            return Err(Error::invalid("inflow.rho0", format!("need rho0 > 0, got {}", self.rho0)));
        }
        if self.u10 > 0.0 {
            return Err(Error::invalid("inflow.U10", format!("need U10 <= 0, got {}", self.u10)));
        }
        if self.u20 == 0.0 {
            return Err(Error::invalid("inflow.U20", "need U20 != 0"));
        }
        if !(self.r0 > 0.0 && self.r0 < self.r1) {
            return Err(Error::invalid(
                "annulus.r0",
                format!("need 0 < r0 < r1, got r0 = {}, r1 = {}", self.r0, self.r1),
            ));
        }
        if self.c0_sq() <= self.u10 * self.u10 + self.u20 * self.u20 {
            return Err(Error::invalid("inflow", "incoming flow must be subsonic at r1"));
        }
        Ok(())
    }

    /// Squared sound speed at the inflow, `gamma A0 rho0^(gamma-1)`.
    pub fn c0_sq(&self) -> f64 {
        self.gamma * self.a0 * self.rho0.powf(self.gamma - 1.0)
    }

    pub fn kappa1(&self) -> f64 {
        self.r1 * self.rho0 * self.u10
    }

    pub fn kappa2(&self) -> f64 {
        self.r1 * self.u20
    }

    /// Bernoulli constant.
    pub fn b0(&self) -> f64 {
        0.5 * (self.u10 * self.u10 + self.u20 * self.u20) + self.c0_sq() / (self.gamma - 1.0)
    }
}

/// Background quantities at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundPoint {
    pub r: f64,
    pub rho: f64,
    pub u1: f64,
    pub u2: f64,
    pub c2: f64,
    pub m1_sq: f64,
    pub m2_sq: f64,
}

impl BackgroundPoint {
    pub fn mach_sq(&self) -> f64 {
        self.m1_sq + self.m2_sq
    }

    /// Signed `M1 M2 = U1 U2 / c^2`.
    pub fn m1m2(&self) -> f64 {
        self.u1 * self.u2 / self.c2
    }

    /// `dU1/dr` from the radial ODE.
    pub fn u1_prime(&self) -> f64 {
        -(1.0 + self.m2_sq) / (self.r * (1.0 - self.m1_sq)) * self.u1
    }

    /// `d rho/dr` from the radial ODE.
    pub fn rho_prime(&self) -> f64 {
        (self.m1_sq + self.m2_sq) / (self.r * (1.0 - self.m1_sq)) * self.rho
    }
}

/// Tabulated background profiles on a uniform radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundFlow {
    pub inflow: GasInflow,
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub c2: Vec<f64>,
    pub m1_sq: Vec<f64>,
    pub m2_sq: Vec<f64>,
    pub kappa1: f64,
    pub kappa2: f64,
    pub b0: f64,
    /// Sonic radius, when `|M|^2 - 1` changes sign in the annulus.
    pub r_c: Option<f64>,
    /// `|kappa2| / sqrt(2 B0)`, only for `U10 = 0`.
    pub r_sharp: Option<f64>,
}

struct Rhs {
    gamma: f64,
    a0: f64,
    kappa2: f64,
}

impl Rhs {
    fn point(&self, r: f64, rho: f64, u1: f64) -> Result<BackgroundPoint> {
        if !(rho > 0.0 && rho.is_finite() && u1.is_finite()) {
            return Err(Error::VacuumOrInvalid { r, rho });
        }
        let c2 = self.gamma * self.a0 * rho.powf(self.gamma - 1.0);
        let u2 = self.kappa2 / r;
        let m1_sq = u1 * u1 / c2;
        if m1_sq >= 1.0 - SONIC_MARGIN {
            return Err(Error::SonicRadialVelocity { r, m1_sq });
        }
        Ok(BackgroundPoint {
            r,
            rho,
            u1,
            u2,
            c2,
            m1_sq,
            m2_sq: u2 * u2 / c2,
        })
    }

    fn deriv(&self, r: f64, rho: f64, u1: f64) -> Result<(f64, f64)> {
        let p = self.point(r, rho, u1)?;
        Ok((p.rho_prime(), p.u1_prime()))
    }

    /// One classical RK4 step of size `h` (either sign).
    fn step(&self, r: f64, rho: f64, u1: f64, h: f64) -> Result<(f64, f64)> {
        let (a1, b1) = self.deriv(r, rho, u1)?;
        let (a2, b2) = self.deriv(r + 0.5 * h, rho + 0.5 * h * a1, u1 + 0.5 * h * b1)?;
        let (a3, b3) = self.deriv(r + 0.5 * h, rho + 0.5 * h * a2, u1 + 0.5 * h * b2)?;
        let (a4, b4) = self.deriv(r + h, rho + h * a3, u1 + h * b3)?;
        Ok((
            rho + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
            u1 + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
        ))
    }

    /// Advances by `dr` with equal RK4 substeps no longer than [`MAX_SUBSTEP`].
    fn advance(&self, r: f64, rho: f64, u1: f64, dr: f64) -> Result<(f64, f64)> {
        let m = (dr.abs() / MAX_SUBSTEP).ceil().max(1.0) as usize;
        let h = dr / m as f64;
        let (mut a, mut b) = (rho, u1);
        for k in 0..m {
            (a, b) = self.step(r + k as f64 * h, a, b, h)?;
        }
        Ok((a, b))
    }
}

/// Integrates the background ODE from `r1` inward on `n_r` uniform nodes.
pub fn solve_background(inflow: GasInflow, n_r: usize) -> Result<BackgroundFlow> {
    inflow.validate()?;
    if n_r < 16 {
        return Err(Error::invalid("grid.N_r", format!("need N_r >= 16, got {n_r}")));
    }
    let kappa2 = inflow.kappa2();
    let rhs = Rhs {
        gamma: inflow.gamma,
        a0: inflow.a0,
        kappa2,
    };
    let h = (inflow.r1 - inflow.r0) / (n_r - 1) as f64;
    let r: Vec<f64> = (0..n_r)
        .map(|i| if i + 1 == n_r { inflow.r1 } else { inflow.r0 + i as f64 * h })
        .collect();
    let mut rho = vec![0.0; n_r];
    let mut u1 = vec![0.0; n_r];
    rho[n_r - 1] = inflow.rho0;
    u1[n_r - 1] = inflow.u10;
    for i in (0..n_r - 1).rev() {
        let (a, b) = rhs.advance(r[i + 1], rho[i + 1], u1[i + 1], r[i] - r[i + 1])?;
        rho[i] = a;
        u1[i] = b;
    }
    let mut u2 = vec![0.0; n_r];
    let mut c2 = vec![0.0; n_r];
    let mut m1_sq = vec![0.0; n_r];
    let mut m2_sq = vec![0.0; n_r];
    for i in 0..n_r {
        let p = rhs.point(r[i], rho[i], u1[i])?;
        u2[i] = p.u2;
        c2[i] = p.c2;
        m1_sq[i] = p.m1_sq;
        m2_sq[i] = p.m2_sq;
    }
    let b0 = inflow.b0();
    let r_sharp = (inflow.u10 == 0.0).then(|| kappa2.abs() / (2.0 * b0).sqrt());
    let mut bg = BackgroundFlow {
        inflow,
        r,
        rho,
        u1,
        u2,
        c2,
        m1_sq,
        m2_sq,
        kappa1: inflow.kappa1(),
        kappa2,
        b0,
        r_c: None,
        r_sharp,
    };
    bg.r_c = match find_sonic_radius(&bg) {
        Ok(rc) => Some(rc),
        Err(Error::NoSonicPoint) => None,
        Err(e) => return Err(e),
    };
    Ok(bg)
}

impl BackgroundFlow {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn h(&self) -> f64 {
        (self.inflow.r1 - self.inflow.r0) / (self.len() - 1) as f64
    }

    pub fn gamma(&self) -> f64 {
        self.inflow.gamma
    }

    pub fn a0(&self) -> f64 {
        self.inflow.a0
    }

    pub fn point(&self, i: usize) -> BackgroundPoint {
        BackgroundPoint {
            r: self.r[i],
            rho: self.rho[i],
            u1: self.u1[i],
            u2: self.u2[i],
            c2: self.c2[i],
            m1_sq: self.m1_sq[i],
            m2_sq: self.m2_sq[i],
        }
    }

    fn rhs(&self) -> Rhs {
        Rhs {
            gamma: self.inflow.gamma,
            a0: self.inflow.a0,
            kappa2: self.kappa2,
        }
    }

    /// Dense output: RK4 from the node at or below `r`.
    pub fn state_at(&self, r: f64) -> Result<BackgroundPoint> {
        let n = self.len();
        let h = self.h();
        let s = (r - self.inflow.r0) / h;
        let i = (s.floor().max(0.0) as usize).min(n - 2);
        let dr = r - self.r[i];
        if dr.abs() <= 1e-14 * h {
            return Ok(self.point(i));
        }
        if (r - self.r[i + 1]).abs() <= 1e-14 * h {
            return Ok(self.point(i + 1));
        }
        let rhs = self.rhs();
        let (rho, u1) = rhs.advance(self.r[i], self.rho[i], self.u1[i], dr)?;
        rhs.point(r, rho, u1)
    }

    /// Background Bernoulli bracket `c^2/(gamma-1)` at every node.
    pub fn bracket(&self) -> Vec<f64> {
        let g1 = self.inflow.gamma - 1.0;
        self.c2.iter().map(|c| c / g1).collect()
    }

    /// Largest relative defects of mass flux, Bernoulli and entropy constancy.
    pub fn invariant_defects(&self) -> InvariantDefects {
        let mut d = InvariantDefects::default();
        let g1 = self.inflow.gamma - 1.0;
        for i in 0..self.len() {
            let p = self.point(i);
            if self.kappa1 != 0.0 {
                let m = (p.r * p.rho * p.u1 - self.kappa1).abs() / self.kappa1.abs();
                d.mass_flux = d.mass_flux.max(m);
            } else {
                d.mass_flux = d.mass_flux.max((p.r * p.rho * p.u1).abs());
            }
            let b = 0.5 * (p.u1 * p.u1 + p.u2 * p.u2) + p.c2 / g1;
            d.bernoulli = d.bernoulli.max((b - self.b0).abs() / self.b0.abs());
            let a = p.c2 / (self.inflow.gamma * p.rho.powf(g1));
            d.entropy = d.entropy.max((a - self.inflow.a0).abs() / self.inflow.a0);
            d.swirl = d.swirl.max((p.r * p.u2 - self.kappa2).abs() / self.kappa2.abs());
        }
        d
    }
}

/// Relative defects of the background invariants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InvariantDefects {
    pub mass_flux: f64,
    pub bernoulli: f64,
    pub entropy: f64,
    pub swirl: f64,
}

/// The reference configuration used throughout the tests and examples:
/// `gamma = 2, A0 = 1, rho0 = 1, U10 = -0.3, U20 = 0.5` on `[1.06, 2]`.
pub fn reference_inflow() -> GasInflow {
    GasInflow {
        gamma: 2.0,
        a0: 1.0,
        rho0: 1.0,
        u10: -0.3,
        u20: 0.5,
        r0: 1.06,
        r1: 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_constants() {
        let inflow = reference_inflow();
        assert!((inflow.kappa1() + 0.6).abs() < 1e-15);
        assert!((inflow.kappa2() - 1.0).abs() < 1e-15);
        assert!((inflow.b0() - 2.17).abs() < 1e-14);
    }

    #[test]
    fn rejects_invalid_inflow() {
        let mut bad = reference_inflow();
        bad.gamma = 1.0;
        assert!(solve_background(bad, 64).is_err());
        let mut bad = reference_inflow();
        bad.u10 = 0.1;
        assert!(solve_background(bad, 64).is_err());
        let mut bad = reference_inflow();
        bad.u20 = 3.0;
        assert!(solve_background(bad, 64).is_err());
    }

    #[test]
    fn inner_radius_too_small_is_sonic_radial() {
        let mut inflow = reference_inflow();
        inflow.r0 = 1.0;
        assert!(matches!(
            solve_background(inflow, 256),
            Err(Error::SonicRadialVelocity { .. })
        ));
    }

    #[test]
    fn dense_output_hits_nodes() {
        let bg = solve_background(reference_inflow(), 128).unwrap();
        let p = bg.state_at(bg.r[37]).unwrap();
        assert_eq!(p.rho, bg.rho[37]);
        let mid = 0.5 * (bg.r[37] + bg.r[38]);
        let q = bg.state_at(mid).unwrap();
        assert!(q.rho > bg.rho[37] && q.rho < bg.rho[38]);
    }
}

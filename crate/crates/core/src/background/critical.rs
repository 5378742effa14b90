//! Sonic radius and the critical helical step.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{BackgroundFlow, BackgroundPoint, GasInflow};
use crate::error::{Error, Result};

/// Closed-form sonic radius of the background determined by `inflow`.
pub fn sonic_radius_closed_form(inflow: &GasInflow) -> f64 {
    let g = inflow.gamma;
    let b0 = inflow.b0();
    let k1 = inflow.kappa1();
    let k2 = inflow.kappa2();
    let rho_c = (2.0 * (g - 1.0) * b0 / ((g + 1.0) * g * inflow.a0)).powf(1.0 / (g - 1.0));
    ((g + 1.0) * (k1 * k1 + k2 * k2 * rho_c * rho_c) / (2.0 * (g - 1.0) * b0 * rho_c * rho_c)).sqrt()
}

/// Root of `|M|^2 = 1`, located by bisection on the dense background profile.
pub fn find_sonic_radius(bg: &BackgroundFlow) -> Result<f64> {
    let g: Vec<f64> = (0..bg.len()).map(|i| bg.m1_sq[i] + bg.m2_sq[i] - 1.0).collect();
    let i = (0..bg.len() - 1)
        .find(|&i| g[i] > 0.0 && g[i + 1] <= 0.0)
        .ok_or(Error::NoSonicPoint)?;
    if g[i + 1] == 0.0 {
        return Ok(bg.r[i + 1]);
    }
    let (mut a, mut b) = (bg.r[i], bg.r[i + 1]);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= 1e-15 * b {
            break;
        }
        if bg.state_at(m)?.mach_sq() > 1.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Critical step and the radius attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalStep {
    pub sigma_star: f64,
    pub argmin_radius: f64,
}

/// Local critical step `2 pi r sqrt((1 - M1^2)/(|M|^2 - 1))`, infinite where subsonic.
pub fn local_critical_step(p: &BackgroundPoint) -> f64 {
    let sup = p.mach_sq() - 1.0;
    if sup <= 0.0 {
        f64::INFINITY
    } else {
        2.0 * PI * p.r * ((1.0 - p.m1_sq) / sup).sqrt()
    }
}

/// Minimum of the local critical step over the supersonic part of the annulus.
pub fn critical_step(bg: &BackgroundFlow) -> Result<CriticalStep> {
    let vals: Vec<f64> = (0..bg.len()).map(|i| local_critical_step(&bg.point(i))).collect();
    let (imin, vmin) = vals
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    if !vmin.is_finite() {
        return Err(Error::NoSupersonicRegion);
    }
    let lo = bg.r[imin.saturating_sub(1)];
    let hi = bg.r[(imin + 1).min(bg.len() - 1)];
    let objective = |r: f64| -> Result<f64> { Ok(local_critical_step(&bg.state_at(r)?)) };
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - invphi * (b - a);
    let mut x2 = a + invphi * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while b - a > 1e-10 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = objective(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = objective(x2)?;
        }
    }
    let mut best = CriticalStep {
        sigma_star: vmin,
        argmin_radius: bg.r[imin],
    };
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f < best.sigma_star {
            best = CriticalStep {
                sigma_star: f,
                argmin_radius: x,
            };
        }
    }
    Ok(best)
}

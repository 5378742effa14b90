//! Node-wise checks of the closed-form coefficient identities.

use super::Check;
use crate::background::{coefficient_table, BackgroundFlow, CoefficientTable};
use crate::error::Result;

/// Relative tolerance of the identity checks.
pub const IDENTITY_TOL: f64 = 1e-6;

/// Largest node-wise relative deviation between two profiles. Nodes where
/// both sides are tiny compared with the profile scale are measured against that scale.
fn max_relative(a: impl Fn(usize) -> f64, b: impl Fn(usize) -> f64, n: usize) -> f64 {
    let scale = (0..n).fold(0.0_f64, |m, i| m.max(a(i).abs()).max(b(i).abs()));
    if scale == 0.0 {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            let (x, y) = (a(i), b(i));
            let den = x.abs().max(y.abs()).max(1e-8 * scale);
            (x - y).abs() / den
        })
        .fold(0.0, f64::max)
}

fn table_checks(t: &CoefficientTable) -> Vec<Check> {
    let n = t.len();
    let pair = |name: &str, a: &dyn Fn(usize) -> f64, b: &dyn Fn(usize) -> f64| {
        Check::at_most(name, max_relative(a, b, n), IDENTITY_TOL)
    };
    let f_scale = t.f_prime.iter().fold(1e-300_f64, |m, v| m.max(v.abs()));
    let k12 = (0..n).fold(0.0_f64, |m, i| m.max(t.k12(i).abs())) / f_scale.max(1.0);
    let k1_min = t.k1.iter().cloned().fold(f64::INFINITY, f64::min);
    let k2_scale = t.k2.iter().fold(1e-300_f64, |m, v| m.max(v.abs())).max(t.k1.iter().fold(0.0, |m, v| m.max(v.abs())));
    let k2_full = t.k2_full.iter().fold(0.0_f64, |m, v| m.max(v.abs())) / k2_scale;
    vec![
        pair("k2_closed_form", &|i| t.k2[i], &|i| t.k2_closed(i)),
        pair("k22_closed_form", &|i| t.k22[i], &|i| t.k22_closed(i)),
        pair("k22_determinant_form", &|i| t.k22[i], &|i| t.k22_determinant(i)),
        pair("e1_dual_form", &|i| t.e1[i], &|i| t.e1_alt(i)),
        pair("e3_dual_form", &|i| t.e3[i], &|i| t.e3_alt(i)),
        pair("a33_mach_form", &|i| t.a33[i], &|i| t.a33_alt(i)),
        pair("k1_closed_form", &|i| t.k1[i], &|i| t.k1_closed(i)),
        Check::at_most("k12_vanishes", k12, 1e-12),
        Check::above("k1_positive", k1_min, 0.0),
        Check::at_most("k2_full_vanishes", k2_full, 1e-10),
    ]
}

/// Runs every coefficient identity for step `sigma` on the nodes of `bg`.
pub fn identity_checks(bg: &BackgroundFlow, sigma: f64) -> Result<Vec<Check>> {
    let t = coefficient_table(bg, sigma)?;
    Ok(table_checks(&t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{critical_step, reference_inflow, solve_background};

    #[test]
    fn reference_identities_hold() {
        let bg = solve_background(reference_inflow(), 512).unwrap();
        let star = critical_step(&bg).unwrap().sigma_star;
        for c in identity_checks(&bg, 0.5 * star).unwrap() {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn relative_measure_handles_zero_profiles() {
        assert_eq!(max_relative(|_| 0.0, |_| 0.0, 4), 0.0);
        assert!((max_relative(|_| 1.0, |_| 1.0 + 1e-9, 4) - 1e-9).abs() < 1e-12);
    }
}

//! Assembly of the `verify.json` ledger for one configuration.

use super::{equivalence_check, identity_checks, Check, Ledger};
use crate::background::{coefficient_table, critical_step, find_sonic_radius, solve_background, sonic_radius_closed_form};
use crate::error::Result;
use crate::solver::{apply_map_once, fixed_point_solve, SolverConfig};

/// Node count of the dense background used for invariant and threshold checks.
pub const DENSE_NODES: usize = 1024;

/// Background invariants, sonic radius, coefficient identities, ellipticity
/// threshold, `trials` equivalence trials and the fixed-point checks of a solve of `cfg`.
pub fn verification_ledger(cfg: &SolverConfig, trials: usize) -> Result<Ledger> {
    let mut ledger = Ledger::default();
    let bg = solve_background(cfg.inflow, DENSE_NODES)?;
    let d = bg.invariant_defects();
    ledger.extend([
        Check::at_most("background_mass_flux", d.mass_flux, 1e-9),
        Check::at_most("background_bernoulli", d.bernoulli, 1e-9),
        Check::at_most("background_entropy", d.entropy, 1e-9),
    ]);
    if let Ok(rc) = find_sonic_radius(&bg) {
        let exact = sonic_radius_closed_form(&cfg.inflow);
        ledger.extend([Check::at_most("sonic_radius_closed_form", (rc - exact).abs() / exact, 1e-7)]);
    }
    ledger.extend(identity_checks(&bg, cfg.bc.sigma)?);
    if let Ok(star) = critical_step(&bg) {
        let below = coefficient_table(&bg, 0.999 * star.sigma_star)?.min_k22().0;
        let above = coefficient_table(&bg, 1.001 * star.sigma_star)?.min_k22().0;
        ledger.extend([
            Check::above("min_k22_below_critical_step", below, 0.0),
            Check::at_most("min_k22_above_critical_step", above, 0.0),
        ]);
    }

    let eq = equivalence_check(trials);
    for t in &eq.trials {
        let excess = (0..5)
            .map(|k| t.mismatch[k] - 5.0 * t.disc_error[k])
            .fold(f64::NEG_INFINITY, f64::max);
        ledger.extend([Check::at_most(format!("equivalence_seed_{}", t.seed), excess, 1e-12)]);
        ledger.seeds.push(t.seed);
    }

    let sol = fixed_point_solve(cfg)?;
    let again = apply_map_once(&sol.state, &sol.problem)?;
    let moved = again.difference(&sol.state).norms().c1();
    let worst_ratio = sol.report.ratios.iter().cloned().fold(0.0, f64::max);
    let last_delta = sol.report.deltas.last().copied().unwrap_or(f64::INFINITY);
    ledger.extend([
        Check::at_most("fixed_point_final_delta", last_delta, cfg.tol),
        Check::at_most("fixed_point_residual", moved, 10.0 * cfg.tol),
        Check::at_most("contraction_ratio_max", worst_ratio, 1.0 - f64::EPSILON),
    ]);
    Ok(ledger)
}

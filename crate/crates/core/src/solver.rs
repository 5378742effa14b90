//! The iteration map and its fixed-point solve.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{
    assemble_g1, assemble_g2, assemble_g3, reconstruct_flow, FlowField, HelicalBC, MixedInputs, PerturbationState,
};
use crate::background::{coefficient_table, solve_background, BackgroundFlow, CoefficientTable, GasInflow};
use crate::elliptic::{check_potential_data, solve_poisson, solve_potential};
use crate::error::{Error, Result, StageExt};
use crate::fields::AnnulusGrid;
use crate::transport::solve_transport;
use crate::verify::{euler_residual, ResidualNorms, ROUNDOFF_TIER};

pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_MAX_ITERS: usize = 100;

/// Everything that defines one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub inflow: GasInflow,
    pub bc: HelicalBC,
    pub n_r: usize,
    pub n_eta: usize,
    pub tol: f64,
    pub max_iters: usize,
}

impl SolverConfig {
    pub fn new(inflow: GasInflow, bc: HelicalBC, n_r: usize, n_eta: usize) -> Self {
        Self {
            inflow,
            bc,
            n_r,
            n_eta,
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }

    pub fn with_resolution(&self, n_r: usize, n_eta: usize) -> Self {
        Self {
            n_r,
            n_eta,
            ..self.clone()
        }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self {
            bc: self.bc.with_eps(eps),
            ..self.clone()
        }
    }
}

/// Background, coefficients and data shared by every application of the map.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: AnnulusGrid,
    pub bg: BackgroundFlow,
    pub table: CoefficientTable,
    pub bc: HelicalBC,
}

impl Problem {
    /// Builds the background on the solver grid and checks every precondition.
    pub fn new(cfg: &SolverConfig) -> Result<Self> {
        cfg.bc.validate()?;
        if !(cfg.tol.is_finite() && cfg.tol > 0.0) {
            return Err(Error::invalid("solver.tol", format!("need tol > 0, got {}", cfg.tol)));
        }
        if cfg.max_iters == 0 {
            return Err(Error::invalid("solver.max_iters", "need max_iters >= 1"));
        }
        let bg = solve_background(cfg.inflow, cfg.n_r).stage("background")?;
        let sigma = cfg.bc.sigma;
        let table = coefficient_table(&bg, sigma).stage("coefficients")?;
        if let Some(sigma_star) = table.sigma_star() {
            if sigma >= sigma_star {
                return Err(Error::StepTooLarge { sigma, sigma_star });
            }
        }
        let grid = AnnulusGrid::new(cfg.inflow.r0, cfg.inflow.r1, cfg.n_r, sigma, cfg.n_eta)?;
        check_potential_data(grid, &table, &cfg.bc)?;
        Ok(Self {
            grid,
            bg,
            table,
            bc: cfg.bc.clone(),
        })
    }
}

/// One application of the iteration map to `wbar`.
pub fn apply_map_once(wbar: &PerturbationState, ctx: &Problem) -> Result<PerturbationState> {
    if !wbar.is_finite() {
        return Err(Error::invalid("W", "iterate is not finite"));
    }
    let tr = solve_transport(wbar, &ctx.bc, &ctx.bg).stage("transport")?;
    let mixed = MixedInputs::new(wbar, &tr.w2, &tr.w4, &tr.w5);
    let g2 = assemble_g2(&mixed, &ctx.table).stage("curl source")?;
    let phi1 = solve_poisson(&g2).stage("poisson")?;
    let g1 = assemble_g1(&mixed, &ctx.table).stage("divergence source")?;
    let g3 = assemble_g3(&g1, &phi1, &ctx.table);
    let pot = solve_potential(&g3, &ctx.table, &ctx.bc).stage("potential")?;
    let w1 = &pot.d_r_phi() - &phi1.d_eta();
    let w3 = &pot.d_eta_phi() + &phi1.d_r4();
    Ok(PerturbationState {
        w: [w1, tr.w2, w3, tr.w4, tr.w5],
    })
}

/// Convergence history and diagnostics of a fixed-point solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||W^k - W^{k-1}||` in the `C^1` proxy.
    pub deltas: Vec<f64>,
    pub deltas_c0: Vec<f64>,
    /// `deltas[k] / deltas[k-1]`.
    pub ratios: Vec<f64>,
    pub residuals: ResidualNorms,
    pub sigma: f64,
    pub sigma_star: Option<f64>,
    pub r_c: Option<f64>,
    pub eps: f64,
    /// `||X(0)|| / eps`; absent for `eps = 0`.
    pub c_star_empirical: Option<f64>,
    pub ball_radius: Option<f64>,
    pub in_ball: bool,
    pub converged: bool,
    pub n_r: usize,
    pub n_eta: usize,
    #[serde(skip)]
    pub wall_time: f64,
}

impl SolveReport {
    /// Leading ratios whose deltas all lie above [`ROUNDOFF_TIER`]. Near
    /// convergence the `C^1` proxy differences reach a floor of order
    /// `ulp(phi) / h_r^2`, and ratios formed there measure rounding only.
    pub fn resolved_ratios(&self) -> &[f64] {
        let n = self.deltas.iter().skip(1).take_while(|&&d| d >= ROUNDOFF_TIER).count();
        &self.ratios[..n]
    }
}

/// Converged perturbation, the reconstructed flow and the report.
#[derive(Debug, Clone)]
pub struct Solution {
    pub problem: Problem,
    pub state: PerturbationState,
    pub flow: FlowField,
    pub report: SolveReport,
}

/// Iterates the map from `W = 0` until the successive difference drops below `tol`.
pub fn fixed_point_solve(cfg: &SolverConfig) -> Result<Solution> {
    let start = Instant::now();
    let ctx = Problem::new(cfg)?;
    let mut w = PerturbationState::zeros(ctx.grid);
    let mut deltas = Vec::new();
    let mut deltas_c0 = Vec::new();
    let mut ratios = Vec::new();
    let mut first_norm = 0.0;
    let mut converged = false;
    for k in 0..cfg.max_iters {
        let next = apply_map_once(&w, &ctx)?;
        let d = next.difference(&w).norms();
        if k == 0 {
            first_norm = next.norms().c1();
        }
        if let Some(&prev) = deltas.last() {
            ratios.push(if prev > 0.0 { d.c1() / prev } else { 0.0 });
        }
        deltas.push(d.c1());
        deltas_c0.push(d.c0());
        w = next;
        if d.c1() < cfg.tol {
            converged = true;
            break;
        }
    }
    let last_ratio = ratios.last().copied().unwrap_or(f64::INFINITY);
    if !converged && last_ratio >= 1.0 {
        return Err(Error::NoConvergence {
            iterations: deltas.len(),
            last_ratio,
        });
    }
    let flow = reconstruct_flow(&w, &ctx.table).stage("reconstruction")?;
    let residuals = euler_residual(&flow, &ctx.table).norms;
    let eps = cfg.bc.eps;
    let c_star = (eps > 0.0).then(|| first_norm / eps);
    let ball_radius = c_star.map(|c| 2.0 * c * eps);
    let in_ball = ball_radius.map_or(w.norms().c1() == 0.0, |b| w.norms().c1() <= b);
    let report = SolveReport {
        iterations: deltas.len(),
        deltas,
        deltas_c0,
        ratios,
        residuals,
        sigma: ctx.table.sigma,
        sigma_star: ctx.table.sigma_star(),
        r_c: ctx.bg.r_c,
        eps,
        c_star_empirical: c_star,
        ball_radius,
        in_ball,
        converged,
        n_r: cfg.n_r,
        n_eta: cfg.n_eta,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(Solution {
        problem: ctx,
        state: w,
        flow,
        report,
    })
}

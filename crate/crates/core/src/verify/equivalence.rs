//! Randomized check that the Euler residuals are pointwise combinations of
//! the residuals of the transport/div-curl formulation.
//!
//! Each trial draws smooth fields `(V1, V3, V_c, B, A)`, derives `rho`, `V2`
//! and `p` from them, and evaluates both residual sets twice: once with
//! discrete derivatives of the sampled fields and once with exact derivatives
//! obtained by the chain rule. The combination identity must hold to round-off
//! on the exact route and to discretization error on the discrete route.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::residual::INTERIOR_MARGIN;
use super::ROUNDOFF_TIER;
use crate::fields::{AnnulusGrid, Field2D};

const MODES: usize = 4;
const DEGREE: usize = 4;

/// Base value plus a random polynomial-in-`r` times trigonometric-in-`eta` perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Component {
    base: f64,
    cos: [[f64; DEGREE]; MODES],
    sin: [[f64; DEGREE]; MODES],
}

impl Component {
    fn draw(rng: &mut ChaCha8Rng, base: f64, amp: f64) -> Self {
        let scale = amp / (DEGREE * MODES) as f64;
        let mut c = Self {
            base,
            cos: [[0.0; DEGREE]; MODES],
            sin: [[0.0; DEGREE]; MODES],
        };
        for k in 0..MODES {
            for m in 0..DEGREE {
                c.cos[k][m] = scale * rng.gen_range(-1.0..1.0);
                if k > 0 {
                    c.sin[k][m] = scale * rng.gen_range(-1.0..1.0);
                }
            }
        }
        c
    }

    /// Value, `d_r` and `d_eta` at `(s, eta)` where `s = (r - r0)/L`.
    fn eval(&self, s: f64, inv_l: f64, omega: f64, eta: f64) -> (f64, f64, f64) {
        let (mut v, mut vr, mut ve) = (self.base, 0.0, 0.0);
        for k in 0..MODES {
            let (sn, cs) = (k as f64 * omega * eta).sin_cos();
            let kw = k as f64 * omega;
            let mut pw = 1.0;
            let mut dpw = 0.0;
            for m in 0..DEGREE {
                let (a, b) = (self.cos[k][m], self.sin[k][m]);
                v += pw * (a * cs + b * sn);
                vr += dpw * inv_l * (a * cs + b * sn);
                ve += pw * kw * (b * cs - a * sn);
                dpw = dpw * s + pw;
                pw *= s;
            }
        }
        (v, vr, ve)
    }
}

/// Seeded random smooth fields `(V1, V3, V_c, B, A)` and the gas exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomFields {
    pub seed: u64,
    pub gamma: f64,
    comps: [Component; 5],
}

impl RandomFields {
    pub fn generate(seed: u64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = rng.gen_range(1.2..3.0);
        let comps = [
            Component::draw(&mut rng, -0.6, amplitude),
            Component::draw(&mut rng, 0.0, amplitude),
            Component::draw(&mut rng, 1.0, amplitude),
            Component::draw(&mut rng, 2.17, amplitude),
            Component::draw(&mut rng, 1.0, amplitude),
        ];
        Self { seed, gamma, comps }
    }

    fn node(&self, grid: &AnnulusGrid, r: f64, eta: f64) -> [(f64, f64, f64); 5] {
        let inv_l = 1.0 / (grid.r1 - grid.r0);
        let s = (r - grid.r0) * inv_l;
        let w = grid.omega1();
        std::array::from_fn(|k| self.comps[k].eval(s, inv_l, w, eta))
    }
}

/// Node quantities entering both residual sets.
#[derive(Debug, Clone, Copy, Default)]
struct Node {
    r: f64,
    sigma: f64,
    gamma: f64,
    v1: f64,
    v3: f64,
    vc: f64,
    b: f64,
    a: f64,
    rho: f64,
    v2: f64,
    v1_r: f64,
    v1_e: f64,
    v3_r: f64,
    v3_e: f64,
    vc_r: f64,
    vc_e: f64,
    b_r: f64,
    b_e: f64,
    a_r: f64,
    a_e: f64,
    v2_r: f64,
    v2_e: f64,
    p_r: f64,
    p_e: f64,
    rv1_r: f64,
    rv2_e: f64,
    rv3_e: f64,
}

fn bracket(r: f64, sigma: f64, v1: f64, v3: f64, vc: f64, b: f64) -> f64 {
    let s2 = sigma * sigma / (4.0 * PI * PI * r * r);
    b - 0.5 * (v1 * v1 + vc * vc / (r * r) + sigma * vc * v3 / (PI * r * r) + (1.0 + s2) * v3 * v3)
}

fn density(gamma: f64, a: f64, br: f64) -> f64 {
    ((gamma - 1.0) / (a * gamma) * br).powf(1.0 / (gamma - 1.0))
}

/// Weighted Euler residuals `(c^2/rho E1, V1 E2, E3, E4, E5)` and their combinations of reformulated residuals.
fn residual_pair(n: &Node) -> ([f64; 5], [f64; 5]) {
    let r = n.r;
    let g = n.gamma;
    let k = n.sigma / (2.0 * PI * r);
    let q = n.sigma / (2.0 * PI * r * r);
    let a_coef = 1.0 + k * k;
    let c2 = (g - 1.0) * bracket(r, n.sigma, n.v1, n.v3, n.vc, n.b);

    let lam_e = k * n.v2 + n.v3;
    let conv = |xr: f64, xe: f64| n.v1 * xr + lam_e * xe;
    let e1 = n.rv1_r + k * n.rv2_e + n.rho * n.v1 / r + n.rv3_e;
    let e2 = conv(n.v1_r, n.v1_e) + n.p_r / n.rho - n.v2 * n.v2 / r;
    let e3 = conv(n.v2_r, n.v2_e) + k * n.p_e / n.rho + n.v1 * n.v2 / r;
    let e4 = conv(n.v3_r, n.v3_e) + n.p_e / n.rho;
    let e5 = conv(n.a_r, n.a_e);

    let lam = q * n.vc + a_coef * n.v3;
    let tr = |xr: f64, xe: f64| n.v1 * xr + lam * xe;
    let r_b = tr(n.b_r, n.b_e);
    let r_a = tr(n.a_r, n.a_e);
    let r_vc = tr(n.vc_r, n.vc_e);
    let h_a = n.rho.powf(g - 1.0) / (g - 1.0);
    let r313 = n.v1 * (n.v3_r - n.v1_e) + n.b_e - n.v2 / r * n.vc_e - h_a * n.a_e;
    let e_true = (c2 - n.v1 * n.v1) * n.v1_r - n.v1 * lam * (n.v1_e + n.v3_r)
        + (a_coef * c2 - lam * lam) * n.v3_e
        + c2 * n.v1 / r
        + n.v1 * n.v2 * n.v2 / r
        + q * c2 * n.vc_e;

    let euler = [c2 / n.rho * e1, n.v1 * e2, e3, e4, e5];
    let combo = [
        e_true + r_b - c2 / ((g - 1.0) * n.a) * r_a - n.v2 / r * r_vc,
        r_b - n.v2 / r * r_vc - h_a * r_a - lam * r313,
        r_vc / r + k * r313,
        r313,
        r_a,
    ];
    (euler, combo)
}

fn exact_node(f: &RandomFields, grid: &AnnulusGrid, r: f64, eta: f64) -> Node {
    let [(v1, v1_r, v1_e), (v3, v3_r, v3_e), (vc, vc_r, vc_e), (b, b_r, b_e), (a, a_r, a_e)] = f.node(grid, r, eta);
    let sigma = grid.sigma;
    let g = f.gamma;
    let s2 = sigma * sigma / (4.0 * PI * PI * r * r);
    let br = bracket(r, sigma, v1, v3, vc, b);
    let r2 = r * r;
    let r3 = r2 * r;
    let br_r = b_r
        - v1 * v1_r
        - (vc * vc_r / r2 - vc * vc / r3)
        - (sigma * (vc_r * v3 + vc * v3_r) / (2.0 * PI * r2) - sigma * vc * v3 / (PI * r3))
        - ((1.0 + s2) * v3 * v3_r - sigma * sigma * v3 * v3 / (4.0 * PI * PI * r3));
    let br_e = b_e - v1 * v1_e - vc * vc_e / r2 - sigma * (vc_e * v3 + vc * v3_e) / (2.0 * PI * r2) - (1.0 + s2) * v3 * v3_e;
    let rho = density(g, a, br);
    let rho_r = rho / (g - 1.0) * (br_r / br - a_r / a);
    let rho_e = rho / (g - 1.0) * (br_e / br - a_e / a);
    let v2 = (vc + sigma * v3 / (2.0 * PI)) / r;
    let v2_r = (vc_r + sigma * v3_r / (2.0 * PI)) / r - v2 / r;
    let v2_e = (vc_e + sigma * v3_e / (2.0 * PI)) / r;
    let rg = rho.powf(g);
    let p_r = rg * a_r + g * a * rho.powf(g - 1.0) * rho_r;
    let p_e = rg * a_e + g * a * rho.powf(g - 1.0) * rho_e;
    Node {
        r,
        sigma,
        gamma: g,
        v1,
        v3,
        vc,
        b,
        a,
        rho,
        v2,
        v1_r,
        v1_e,
        v3_r,
        v3_e,
        vc_r,
        vc_e,
        b_r,
        b_e,
        a_r,
        a_e,
        v2_r,
        v2_e,
        p_r,
        p_e,
        rv1_r: rho_r * v1 + rho * v1_r,
        rv2_e: rho_e * v2 + rho * v2_e,
        rv3_e: rho_e * v3 + rho * v3_e,
    }
}

/// Outcome of one randomized trial; arrays are indexed by Euler equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceTrial {
    pub seed: u64,
    pub gamma: f64,
    /// `max |w_k E_k - combo_k|` with discrete derivatives.
    pub mismatch: [f64; 5],
    /// The same with exact derivatives.
    pub exact_mismatch: [f64; 5],
    /// Measured discretization error of either side of the identity.
    pub disc_error: [f64; 5],
    pub pass: bool,
}

/// Runs one trial on `grid` (rows within [`INTERIOR_MARGIN`] of a wall are skipped).
pub fn equivalence_trial(fields: &RandomFields, grid: AnnulusGrid) -> EquivalenceTrial {
    let g = fields.gamma;
    let sigma = grid.sigma;
    let mk = |k: usize| {
        Field2D::from_fn(grid, |r, e| {
            let v = fields.node(&grid, r, e);
            v[k].0
        })
    };
    let [v1, v3, vc, b, a] = [mk(0), mk(1), mk(2), mk(3), mk(4)];
    let mut rho = Field2D::zeros(grid);
    let mut v2 = Field2D::zeros(grid);
    for i in 0..grid.n_r {
        let r = grid.r(i);
        for j in 0..grid.n_eta {
            let ix = [i, j];
            let br = bracket(r, sigma, v1.values[ix], v3.values[ix], vc.values[ix], b.values[ix]);
            rho.values[ix] = density(g, a.values[ix], br);
            v2.values[ix] = (vc.values[ix] + sigma * v3.values[ix] / (2.0 * PI)) / r;
        }
    }
    let p = a.zip_with(&rho, |a, rho| a * rho.powf(g));
    let rv1 = rho.zip_with(&v1, |x, y| x * y);
    let rv2 = rho.zip_with(&v2, |x, y| x * y);
    let rv3 = rho.zip_with(&v3, |x, y| x * y);
    let dr = |f: &Field2D| f.d_r4();
    let de = |f: &Field2D| f.d_eta();
    let (v1_r, v1_e, v3_r, v3_e) = (dr(&v1), de(&v1), dr(&v3), de(&v3));
    let (vc_r, vc_e, b_r, b_e, a_r, a_e) = (dr(&vc), de(&vc), dr(&b), de(&b), dr(&a), de(&a));
    let (v2_r, v2_e, p_r, p_e) = (dr(&v2), de(&v2), dr(&p), de(&p));
    let (rv1_r, rv2_e, rv3_e) = (dr(&rv1), de(&rv2), de(&rv3));

    let mut mismatch = [0.0_f64; 5];
    let mut exact_mismatch = [0.0_f64; 5];
    let mut disc_error = [0.0_f64; 5];
    for i in INTERIOR_MARGIN..grid.n_r - INTERIOR_MARGIN {
        let r = grid.r(i);
        for j in 0..grid.n_eta {
            let ix = [i, j];
            let nd = Node {
                r,
                sigma,
                gamma: g,
                v1: v1.values[ix],
                v3: v3.values[ix],
                vc: vc.values[ix],
                b: b.values[ix],
                a: a.values[ix],
                rho: rho.values[ix],
                v2: v2.values[ix],
                v1_r: v1_r.values[ix],
                v1_e: v1_e.values[ix],
                v3_r: v3_r.values[ix],
                v3_e: v3_e.values[ix],
                vc_r: vc_r.values[ix],
                vc_e: vc_e.values[ix],
                b_r: b_r.values[ix],
                b_e: b_e.values[ix],
                a_r: a_r.values[ix],
                a_e: a_e.values[ix],
                v2_r: v2_r.values[ix],
                v2_e: v2_e.values[ix],
                p_r: p_r.values[ix],
                p_e: p_e.values[ix],
                rv1_r: rv1_r.values[ix],
                rv2_e: rv2_e.values[ix],
                rv3_e: rv3_e.values[ix],
            };
            let ne = exact_node(fields, &grid, r, grid.eta(j));
            let (ed, cd) = residual_pair(&nd);
            let (ee, ce) = residual_pair(&ne);
            for k in 0..5 {
                mismatch[k] = mismatch[k].max((ed[k] - cd[k]).abs());
                exact_mismatch[k] = exact_mismatch[k].max((ee[k] - ce[k]).abs());
                disc_error[k] = disc_error[k].max((ed[k] - ee[k]).abs()).max((cd[k] - ce[k]).abs());
            }
        }
    }
    let pass = (0..5).all(|k| {
        mismatch[k] <= 5.0 * disc_error[k] + ROUNDOFF_TIER && exact_mismatch[k] <= ROUNDOFF_TIER
    });
    EquivalenceTrial {
        seed: fields.seed,
        gamma: g,
        mismatch,
        exact_mismatch,
        disc_error,
        pass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub trials: Vec<EquivalenceTrial>,
    pub max_mismatch: f64,
    pub max_exact_mismatch: f64,
    pub all_pass: bool,
}

/// Default trial grid: `[1.04, 2] x T_sigma` with `sigma = 4.28`, `129 x 64` nodes.
pub fn default_trial_grid() -> AnnulusGrid {
    AnnulusGrid::new(1.04, 2.0, 129, 4.28, 64).expect("valid trial grid")
}

/// Runs `trials` seeded trials (seeds `0..trials`) with perturbation amplitude 0.05.
pub fn equivalence_check(trials: usize) -> EquivalenceReport {
    let grid = default_trial_grid();
    let trials: Vec<EquivalenceTrial> = (0..trials as u64)
        .into_par_iter()
        .map(|seed| equivalence_trial(&RandomFields::generate(seed, 0.05), grid))
        .collect();
    let max_of = |f: fn(&EquivalenceTrial) -> f64| trials.iter().map(f).fold(0.0, f64::max);
    EquivalenceReport {
        max_mismatch: max_of(|t| t.mismatch.iter().cloned().fold(0.0, f64::max)),
        max_exact_mismatch: max_of(|t| t.exact_mismatch.iter().cloned().fold(0.0, f64::max)),
        all_pass: trials.iter().all(|t| t.pass),
        trials,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_derivatives_match_differences() {
        let f = RandomFields::generate(7, 0.05);
        let grid = default_trial_grid();
        let (r, e, h) = (1.3, 0.9, 1e-6);
        for k in 0..5 {
            let (_, vr, ve) = f.node(&grid, r, e)[k];
            let fr = (f.node(&grid, r + h, e)[k].0 - f.node(&grid, r - h, e)[k].0) / (2.0 * h);
            let fe = (f.node(&grid, r, e + h)[k].0 - f.node(&grid, r, e - h)[k].0) / (2.0 * h);
            assert!((vr - fr).abs() < 1e-8 && (ve - fe).abs() < 1e-8);
        }
    }

    #[test]
    fn single_trial_passes() {
        let t = equivalence_trial(&RandomFields::generate(3, 0.05), default_trial_grid());
        assert!(t.pass, "{t:?}");
    }
}

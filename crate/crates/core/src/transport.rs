//! Transport of swirl, entropy and Bernoulli perturbations along characteristics.
//!
//! Each node is traced backward to the outer cylinder `r = r1` with classical
//! RK4. Stage abscissae fall on a fine radial lattice, on which the Fourier
//! coefficients of the slope numerator and denominator are pre-interpolated
//! (cubic spline in `r`), so a slope evaluation is a short trigonometric sum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::assembly::{HelicalBC, PerturbationState, EPS_FLOOR};
use crate::background::BackgroundFlow;
use crate::error::{Error, Result};
use crate::fields::spline::{SplineFactor, UniformSpline};
use crate::fields::{AnnulusGrid, Field2D};

/// Default number of RK4 steps per radial cell (step `h_r / 4`).
pub const DEFAULT_STEPS_PER_CELL: usize = 4;

/// Coefficients below this fraction of the mean slope scale are at round-off level and skipped.
const MODE_CUTOFF: f64 = 1e-17;

/// Characteristic slope `d eta / d tau` sampled on a fine radial lattice.
///
/// Level `l` sits at `tau_l = r0 + l h_r / (2 s)`, `s` steps per cell, so RK4
/// stages starting at node `i` use levels `2 s i + {0, 1, 2}` and onward.
pub trait SlopeField: Sync {
    fn grid(&self) -> AnnulusGrid;
    fn steps_per_cell(&self) -> usize;
    fn slope(&self, level: usize, eta: f64) -> Result<f64>;

    fn level_radius(&self, level: usize) -> f64 {
        let g = self.grid();
        let per = 2 * self.steps_per_cell();
        if level == per * (g.n_r - 1) {
            g.r1
        } else {
            g.r0 + level as f64 * g.h_r() / per as f64
        }
    }
}

/// A traced characteristic from a grid node to the outer cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicTrace {
    pub start: (f64, f64),
    /// `(tau, eta_bar(tau))` at every RK4 step, from the start radius to `r1`.
    pub path: Vec<(f64, f64)>,
    /// Unwrapped `eta_bar(r1)`.
    pub exit_eta: f64,
}

impl CharacteristicTrace {
    /// Exit abscissa reduced to `[0, sigma)`.
    pub fn exit_eta_reduced(&self, sigma: f64) -> f64 {
        self.exit_eta.rem_euclid(sigma)
    }
}

/// Slope field of the transport equations for a given previous iterate.
pub struct CharacteristicField {
    grid: AnnulusGrid,
    steps: usize,
    omega1: f64,
    num: Vec<Vec<Complex64>>,
    den: Vec<Vec<Complex64>>,
    num_nyquist: bool,
    den_nyquist: bool,
}

fn active_modes(spectra: &[&ndarray::Array2<Complex64>], weights: &[f64], scale: f64) -> usize {
    let m = spectra[0].ncols();
    let mut last = 0;
    for k in 1..m {
        let mag: f64 = spectra
            .iter()
            .zip(weights)
            .map(|(s, w)| w * s.column(k).iter().fold(0.0_f64, |a, c| a.max(c.norm())))
            .sum();
        if mag > MODE_CUTOFF * scale {
            last = k;
        }
    }
    last + 1
}

impl CharacteristicField {
    pub fn new(wbar: &PerturbationState, bg: &BackgroundFlow, steps_per_cell: usize) -> Result<Self> {
        let grid = wbar.grid();
        assert!(steps_per_cell >= 1);
        let sigma = grid.sigma;
        let kappa2 = bg.kappa2;
        let s1 = wbar.w1().spectrum();
        let s2 = wbar.w2().spectrum();
        let s3 = wbar.w3().spectrum();
        let half = grid.n_eta / 2;
        let q_max = sigma / (2.0 * PI * grid.r0 * grid.r0);
        let a_max = 1.0 + q_max * sigma / (2.0 * PI);
        let num_scale = (sigma * kappa2.abs() / (2.0 * PI * grid.r1 * grid.r1)).max(f64::MIN_POSITIVE);
        let den_scale = bg.u1.iter().fold(f64::INFINITY, |m, u| m.min(u.abs())).max(EPS_FLOOR);
        let k_num = active_modes(&[&s2, &s3], &[q_max, a_max], num_scale);
        let k_den = active_modes(&[&s1], &[1.0], den_scale);
        let factor = SplineFactor::new(grid.n_r);
        let h = grid.h_r();
        let spline_modes = |s: &ndarray::Array2<Complex64>, k_max: usize| -> Vec<UniformSpline<Complex64>> {
            (0..k_max)
                .map(|k| UniformSpline::with_factor(&factor, grid.r0, h, s.column(k).to_vec()))
                .collect()
        };
        let sp1 = spline_modes(&s1, k_den);
        let sp2 = spline_modes(&s2, k_num);
        let sp3 = spline_modes(&s3, k_num);
        let per = 2 * steps_per_cell;
        let n_levels = per * (grid.n_r - 1) + 1;
        let mut num = Vec::with_capacity(n_levels);
        let mut den = Vec::with_capacity(n_levels);
        for l in 0..n_levels {
            let tau = if l + 1 == n_levels {
                grid.r1
            } else {
                grid.r0 + l as f64 * h / per as f64
            };
            let u1 = bg.state_at(tau)?.u1;
            let q = sigma / (2.0 * PI * tau * tau);
            let a = 1.0 + q * sigma / (2.0 * PI);
            let nrow: Vec<Complex64> = (0..k_num)
                .map(|k| {
                    let base = if k == 0 { Complex64::new(kappa2, 0.0) } else { Complex64::new(0.0, 0.0) };
                    (sp2[k].eval(tau) + base) * q + sp3[k].eval(tau) * a
                })
                .collect();
            let drow: Vec<Complex64> = (0..k_den)
                .map(|k| {
                    let base = if k == 0 { Complex64::new(u1, 0.0) } else { Complex64::new(0.0, 0.0) };
                    sp1[k].eval(tau) + base
                })
                .collect();
            num.push(nrow);
            den.push(drow);
        }
        Ok(Self {
            grid,
            steps: steps_per_cell,
            omega1: grid.omega1(),
            num,
            den,
            num_nyquist: k_num == half + 1,
            den_nyquist: k_den == half + 1,
        })
    }

    /// Number of Fourier modes kept in the slope numerator and denominator.
    pub fn active_modes(&self) -> (usize, usize) {
        (self.num[0].len(), self.den[0].len())
    }
}

#[inline]
fn trig_pair(
    a: &[Complex64],
    b: &[Complex64],
    omega1: f64,
    eta: f64,
    a_nyq: bool,
    b_nyq: bool,
) -> (f64, f64) {
    let ma = a.len();
    let mb = b.len();
    let m = ma.max(mb);
    let mut sa = a[0].re;
    let mut sb = b[0].re;
    if m == 1 {
        return (sa, sb);
    }
    let (s, c) = (omega1 * eta).sin_cos();
    let z = Complex64::new(c, s);
    let mut zk = z;
    let (mut acc_a, mut acc_b) = (0.0, 0.0);
    let la = if a_nyq { ma - 1 } else { ma };
    let lb = if b_nyq { mb - 1 } else { mb };
    for k in 1..m {
        if k < la {
            acc_a += a[k].re * zk.re - a[k].im * zk.im;
        } else if a_nyq && k == ma - 1 {
            sa += a[k].re * zk.re;
        }
        if k < lb {
            acc_b += b[k].re * zk.re - b[k].im * zk.im;
        } else if b_nyq && k == mb - 1 {
            sb += b[k].re * zk.re;
        }
        zk *= z;
    }
    (sa + 2.0 * acc_a, sb + 2.0 * acc_b)
}

impl SlopeField for CharacteristicField {
    fn grid(&self) -> AnnulusGrid {
        self.grid
    }

    fn steps_per_cell(&self) -> usize {
        self.steps
    }

    fn slope(&self, level: usize, eta: f64) -> Result<f64> {
        let (n, d) = trig_pair(
            &self.num[level],
            &self.den[level],
            self.omega1,
            eta,
            self.num_nyquist,
            self.den_nyquist,
        );
        if d.abs() < EPS_FLOOR || !d.is_finite() {
            return Err(Error::DegenerateRadialVelocity {
                r: self.level_radius(level),
                eta,
                value: d,
            });
        }
        Ok(n / d)
    }
}

/// Traces the characteristic through node `(r_i, eta)` to `r1`.
pub fn trace_from<S: SlopeField + ?Sized>(field: &S, i: usize, eta: f64, record_path: bool) -> Result<CharacteristicTrace> {
    let g = field.grid();
    let s = field.steps_per_cell();
    let per = 2 * s;
    let h = g.h_r() / s as f64;
    let mut x = eta;
    let mut level = per * i;
    let end = per * (g.n_r - 1);
    let mut path = Vec::new();
    if record_path {
        path.push((field.level_radius(level), x));
    }
    while level < end {
        let k1 = field.slope(level, x)?;
        let k2 = field.slope(level + 1, x + 0.5 * h * k1)?;
        let k3 = field.slope(level + 1, x + 0.5 * h * k2)?;
        let k4 = field.slope(level + 2, x + h * k3)?;
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        level += 2;
        if record_path {
            path.push((field.level_radius(level), x));
        }
    }
    Ok(CharacteristicTrace {
        start: (g.r(i), eta),
        path,
        exit_eta: x,
    })
}

/// Traces the characteristic of the transport equations with coefficients from `wbar` through node `(i, j)`.
pub fn trace_characteristic(
    wbar: &PerturbationState,
    bg: &BackgroundFlow,
    node: (usize, usize),
) -> Result<CharacteristicTrace> {
    let field = CharacteristicField::new(wbar, bg, DEFAULT_STEPS_PER_CELL)?;
    trace_from(&field, node.0, wbar.grid().eta(node.1), true)
}

/// Unwrapped exit abscissae `eta_bar(r1; r_i, eta_j)` for every node.
pub fn exit_map<S: SlopeField + ?Sized>(field: &S) -> Result<Field2D> {
    let g = field.grid();
    let rows: Vec<Vec<f64>> = (0..g.n_r)
        .into_par_iter()
        .map(|i| {
            (0..g.n_eta)
                .map(|j| trace_from(field, i, g.eta(j), false).map(|t| t.exit_eta))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Field2D::zeros(g);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            out.values[[i, j]] = v;
        }
    }
    Ok(out)
}

/// Transported perturbations `(W2, W4, W5)` and the exit map they were read from.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    pub w2: Field2D,
    pub w4: Field2D,
    pub w5: Field2D,
    pub exit: Option<Field2D>,
}

/// Solves the three transport problems with coefficients frozen at `wbar`.
pub fn solve_transport(wbar: &PerturbationState, bc: &HelicalBC, bg: &BackgroundFlow) -> Result<TransportSolution> {
    let grid = wbar.grid();
    if bc.eps == 0.0 {
        let z = Field2D::zeros(grid);
        return Ok(TransportSolution {
            w2: z.clone(),
            w4: z.clone(),
            w5: z,
            exit: None,
        });
    }
    let field = CharacteristicField::new(wbar, bg, DEFAULT_STEPS_PER_CELL)?;
    let exit = exit_map(&field)?;
    let sigma = grid.sigma;
    let eval = |s: &crate::assembly::FourierSeries| exit.map(|x| bc.eps * s.eval(x, sigma));
    Ok(TransportSolution {
        w2: eval(&bc.qc),
        w4: eval(&bc.a_tilde),
        w5: eval(&bc.b_tilde),
        exit: Some(exit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant {
        grid: AnnulusGrid,
        lambda: f64,
    }

    impl SlopeField for Constant {
        fn grid(&self) -> AnnulusGrid {
            self.grid
        }
        fn steps_per_cell(&self) -> usize {
            4
        }
        fn slope(&self, _level: usize, _eta: f64) -> Result<f64> {
            Ok(self.lambda)
        }
    }

    #[test]
    fn constant_slope_gives_straight_lines() {
        let grid = AnnulusGrid::new(1.0, 2.0, 33, 2.0, 8).unwrap();
        let f = Constant { grid, lambda: -0.7 };
        for i in [0, 5, 32] {
            let t = trace_from(&f, i, 0.25, true).unwrap();
            let expect = 0.25 - 0.7 * (2.0 - grid.r(i));
            assert!((t.exit_eta - expect).abs() < 1e-13);
            assert_eq!(t.path.first().unwrap().0, grid.r(i));
            assert_eq!(t.path.last().unwrap().0, 2.0);
            assert!(t.path.windows(2).all(|w| w[1].0 > w[0].0));
        }
    }

    #[test]
    fn trig_pair_matches_direct_sum() {
        let a = vec![Complex64::new(0.5, 0.0), Complex64::new(0.1, -0.2), Complex64::new(0.3, 0.0)];
        let b = vec![Complex64::new(-1.0, 0.0), Complex64::new(0.05, 0.02)];
        let w = 1.3;
        let x = 0.77;
        let (sa, sb) = trig_pair(&a, &b, w, x, true, false);
        let ea = 0.5 + 2.0 * (a[1] * Complex64::from_polar(1.0, w * x)).re + 0.3 * (2.0 * w * x).cos();
        let eb = -1.0 + 2.0 * (b[1] * Complex64::from_polar(1.0, w * x)).re;
        assert!((sa - ea).abs() < 1e-15 && (sb - eb).abs() < 1e-15);
    }
}

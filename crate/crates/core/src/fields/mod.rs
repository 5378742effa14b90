//! Discrete calculus on the periodic annulus `[r0, r1] x T_sigma`.

pub mod spectral;
pub mod spline;

use std::f64::consts::PI;
use std::io::Write;
use std::ops::{Add, Mul, Sub};

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform tensor grid: `n_r` radial nodes including both walls, `n_eta`
/// periodic nodes without a duplicated seam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusGrid {
    pub r0: f64,
    pub r1: f64,
    pub n_r: usize,
    pub sigma: f64,
    pub n_eta: usize,
}

impl AnnulusGrid {
    pub fn new(r0: f64, r1: f64, n_r: usize, sigma: f64, n_eta: usize) -> Result<Self> {
        if !(r0.is_finite() && r1.is_finite() && r0 > 0.0 && r1 > r0) {
            return Err(Error::invalid("annulus", format!("need 0 < r0 < r1, got r0 = {r0}, r1 = {r1}")));
        }
        if n_r < 16 {
            return Err(Error::invalid("grid.N_r", format!("need N_r >= 16, got {n_r}")));
        }
        if n_eta < 8 || !n_eta.is_power_of_two() {
            return Err(Error::invalid(
                "grid.N_eta",
                format!("need a power of two >= 8, got {n_eta}"),
            ));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid("helical.sigma", format!("need sigma > 0, got {sigma}")));
        }
        Ok(Self {
            r0,
            r1,
            n_r,
            sigma,
            n_eta,
        })
    }

    pub fn h_r(&self) -> f64 {
        (self.r1 - self.r0) / (self.n_r - 1) as f64
    }

    pub fn h_eta(&self) -> f64 {
        self.sigma / self.n_eta as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        if i + 1 == self.n_r {
            self.r1
        } else {
            self.r0 + i as f64 * self.h_r()
        }
    }

    pub fn eta(&self, j: usize) -> f64 {
        j as f64 * self.h_eta()
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.n_r).map(|i| self.r(i)).collect()
    }

    /// Fundamental wavenumber `2 pi / sigma`.
    pub fn omega1(&self) -> f64 {
        2.0 * PI / self.sigma
    }

    pub fn omega(&self, k: usize) -> f64 {
        k as f64 * self.omega1()
    }

    /// Number of stored half-spectrum coefficients.
    pub fn n_modes(&self) -> usize {
        self.n_eta / 2 + 1
    }

    /// The same annulus with a different resolution.
    pub fn with_resolution(&self, n_r: usize, n_eta: usize) -> Result<Self> {
        Self::new(self.r0, self.r1, n_r, self.sigma, n_eta)
    }
}

/// Real field sampled on an [`AnnulusGrid`]; row `i` is radius `r_i`, column `j` is `eta_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: AnnulusGrid,
    pub values: Array2<f64>,
}

impl Field2D {
    pub fn zeros(grid: AnnulusGrid) -> Self {
        Self {
            grid,
            values: Array2::zeros((grid.n_r, grid.n_eta)),
        }
    }

    pub fn from_values(grid: AnnulusGrid, values: Array2<f64>) -> Self {
        assert_eq!(values.dim(), (grid.n_r, grid.n_eta), "field shape does not match grid");
        Self { grid, values }
    }

    pub fn from_fn(grid: AnnulusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.n_r, grid.n_eta), |(i, j)| f(grid.r(i), grid.eta(j)));
        Self { grid, values }
    }

    /// Field constant along each radial row, `f(r_i)`.
    pub fn from_radial(grid: AnnulusGrid, f: impl Fn(usize) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.n_r, grid.n_eta), |(i, _)| f(i));
        Self { grid, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j % self.grid.n_eta]]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.mapv(f),
        }
    }

    /// Node-wise combination `f(r_i, a_ij, b_ij)`.
    pub fn zip_with(&self, other: &Field2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = self.clone();
        Zip::from(&mut out.values).and(&other.values).for_each(|a, &b| *a = f(*a, b));
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Half spectrum of each radial row.
    pub fn spectrum(&self) -> Array2<Complex64> {
        spectral::forward_rows(&self.values)
    }

    pub fn from_spectrum(grid: AnnulusGrid, coeffs: &Array2<Complex64>) -> Self {
        Self {
            grid,
            values: spectral::inverse_rows(coeffs, grid.n_eta),
        }
    }

    fn spectral_op(&self, op: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let mut c = self.spectrum();
        for mut row in c.outer_iter_mut() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = op(k, *v);
            }
        }
        Self::from_spectrum(self.grid, &c)
    }

    /// Spectral `d/d eta`; the Nyquist mode is dropped.
    pub fn d_eta(&self) -> Self {
        let half = self.grid.n_eta / 2;
        let w = self.grid.omega1();
        self.spectral_op(|k, c| {
            if k == half {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, w * k as f64)
            }
        })
    }

    /// Spectral second derivative in eta.
    pub fn d_eta2(&self) -> Self {
        let w = self.grid.omega1();
        self.spectral_op(|k, c| c * (-(w * k as f64).powi(2)))
    }

    /// Resamples every row at a shifted abscissa: `out(r_i, eta) = self(r_i, eta + shift[i])`.
    pub fn shift_rows(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.grid.n_r);
        let half = self.grid.n_eta / 2;
        let w = self.grid.omega1();
        let mut c = self.spectrum();
        for (i, mut row) in c.outer_iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                let theta = w * k as f64 * shift[i];
                *v = if k == half {
                    *v * theta.cos()
                } else {
                    *v * Complex64::from_polar(1.0, theta)
                };
            }
        }
        Self::from_spectrum(self.grid, &c)
    }

    /// Second-order `d/dr`: centred in the interior, one-sided at both walls.
    pub fn d_r(&self) -> Self {
        let g = self.grid;
        let n = g.n_r;
        let inv = 1.0 / (2.0 * g.h_r());
        let v = &self.values;
        let mut out = Array2::zeros(v.dim());
        for j in 0..g.n_eta {
            out[[0, j]] = (-3.0 * v[[0, j]] + 4.0 * v[[1, j]] - v[[2, j]]) * inv;
            for i in 1..n - 1 {
                out[[i, j]] = (v[[i + 1, j]] - v[[i - 1, j]]) * inv;
            }
            out[[n - 1, j]] = (3.0 * v[[n - 1, j]] - 4.0 * v[[n - 2, j]] + v[[n - 3, j]]) * inv;
        }
        Self::from_values(g, out)
    }

    /// Second-order `d^2/dr^2`: centred in the interior, one-sided four-point at the walls.
    pub fn d_rr(&self) -> Self {
        let g = self.grid;
        let n = g.n_r;
        let inv = 1.0 / (g.h_r() * g.h_r());
        let v = &self.values;
        let mut out = Array2::zeros(v.dim());
        for j in 0..g.n_eta {
            out[[0, j]] = (2.0 * v[[0, j]] - 5.0 * v[[1, j]] + 4.0 * v[[2, j]] - v[[3, j]]) * inv;
            for i in 1..n - 1 {
                out[[i, j]] = (v[[i + 1, j]] - 2.0 * v[[i, j]] + v[[i - 1, j]]) * inv;
            }
            out[[n - 1, j]] =
                (2.0 * v[[n - 1, j]] - 5.0 * v[[n - 2, j]] + 4.0 * v[[n - 3, j]] - v[[n - 4, j]]) * inv;
        }
        Self::from_values(g, out)
    }

    /// Fourth-order `d/dr` (five-point centred, one-sided near the walls).
    pub fn d_r4(&self) -> Self {
        let g = self.grid;
        let mut out = Array2::zeros(self.values.dim());
        let h = g.h_r();
        for j in 0..g.n_eta {
            let col: Vec<f64> = (0..g.n_r).map(|i| self.values[[i, j]]).collect();
            for (i, d) in fd4_derivative(&col, h).into_iter().enumerate() {
                out[[i, j]] = d;
            }
        }
        Self::from_values(g, out)
    }

    /// Row-wise eta-mean.
    pub fn row_means(&self) -> Vec<f64> {
        self.values
            .outer_iter()
            .map(|row| row.sum() / self.grid.n_eta as f64)
            .collect()
    }

    /// Writes `r,eta,value` rows.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "r,eta,value")?;
        for i in 0..self.grid.n_r {
            for j in 0..self.grid.n_eta {
                writeln!(
                    w,
                    "{},{},{}",
                    crate::io::fmt_g17(self.grid.r(i)),
                    crate::io::fmt_g17(self.grid.eta(j)),
                    crate::io::fmt_g17(self.values[[i, j]])
                )?;
            }
        }
        Ok(())
    }
}

/// Fourth-order first derivative of uniformly spaced samples.
pub fn fd4_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5);
    let inv = 1.0 / (12.0 * h);
    let mut d = vec![0.0; n];
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * inv;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * inv;
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * inv;
    }
    d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * inv;
    d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) * inv;
    d
}

impl Add for &Field2D {
    type Output = Field2D;
    fn add(self, rhs: &Field2D) -> Field2D {
        Field2D {
            grid: self.grid,
            values: &self.values + &rhs.values,
        }
    }
}

impl Sub for &Field2D {
    type Output = Field2D;
    fn sub(self, rhs: &Field2D) -> Field2D {
        Field2D {
            grid: self.grid,
            values: &self.values - &rhs.values,
        }
    }
}

impl Mul<f64> for &Field2D {
    type Output = Field2D;
    fn mul(self, rhs: f64) -> Field2D {
        self.scale(rhs)
    }
}

/// Discrete `C^0` norm and `C^1` proxy (`c0 + max|d_r| + max|d_eta|`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Norms {
    pub c0: f64,
    pub c1: f64,
}

pub fn c_norms(field: &Field2D) -> Norms {
    let c0 = field.max_abs();
    if c0 == 0.0 {
        return Norms { c0: 0.0, c1: 0.0 };
    }
    let c1 = c0 + field.d_r().max_abs() + field.d_eta().max_abs();
    Norms { c0, c1 }
}

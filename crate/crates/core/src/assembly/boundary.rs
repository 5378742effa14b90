//! Boundary data on the outer and inner cylinders as finite Fourier series.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sum_k cos[k] cos(2 pi k eta / sigma) + sin[k] sin(2 pi k eta / sigma)`, `k >= 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `a cos(k w eta) + b sin(k w eta)`.
    pub fn single(k: usize, a: f64, b: f64) -> Self {
        let mut s = Self {
            cos: vec![0.0; k + 1],
            sin: vec![0.0; k + 1],
        };
        s.cos[k] = a;
        s.sin[k] = b;
        s
    }

    /// Highest mode with a nonzero coefficient (0 for the zero series).
    pub fn n_max(&self) -> usize {
        let last = |v: &[f64]| v.iter().rposition(|&c| c != 0.0).unwrap_or(0);
        last(&self.cos).max(last(&self.sin))
    }

    pub fn mean(&self) -> f64 {
        self.cos.first().copied().unwrap_or(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }

    fn a(&self, k: usize) -> f64 {
        self.cos.get(k).copied().unwrap_or(0.0)
    }

    fn b(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.sin.get(k).copied().unwrap_or(0.0)
        }
    }

    pub fn eval(&self, eta: f64, period: f64) -> f64 {
        let w = 2.0 * PI / period;
        (0..=self.n_max())
            .map(|k| {
                let (s, c) = (k as f64 * w * eta).sin_cos();
                self.a(k) * c + self.b(k) * s
            })
            .sum()
    }

    /// Exponential coefficient `c_k` (`k >= 0`) with `f = c_0 + 2 Re sum_{k>0} c_k e^{i k w eta}`.
    pub fn coeff(&self, k: usize) -> Complex64 {
        if k == 0 {
            Complex64::new(self.a(0), 0.0)
        } else {
            Complex64::new(0.5 * self.a(k), -0.5 * self.b(k))
        }
    }

    /// Antiderivative `Q(x) = int_0^x f` of a zero-mean series.
    pub fn antiderivative(&self, x: f64, period: f64) -> f64 {
        let w = 2.0 * PI / period;
        (1..=self.n_max())
            .map(|k| {
                let kw = k as f64 * w;
                let (s, c) = (kw * x).sin_cos();
                self.a(k) * s / kw + self.b(k) * (1.0 - c) / kw
            })
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            cos: self.cos.iter().map(|c| c * s).collect(),
            sin: self.sin.iter().map(|c| c * s).collect(),
        }
    }
}

/// Helical step, perturbation amplitude and the five boundary functions.
///
/// `qc`, `a_tilde`, `b_tilde` perturb the swirl, entropy and Bernoulli
/// function at `r1`; `q3` the axial velocity at `r1`; `q1` the radial
/// velocity at `r0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelicalBC {
    pub sigma: f64,
    pub eps: f64,
    pub qc: FourierSeries,
    pub q1: FourierSeries,
    pub q3: FourierSeries,
    pub a_tilde: FourierSeries,
    pub b_tilde: FourierSeries,
}

/// Largest admissible perturbation amplitude.
pub const EPS_MAX: f64 = 1e-2;

impl HelicalBC {
    /// Every boundary function equal to a single first mode with distinct phases.
    pub fn single_mode(sigma: f64, eps: f64) -> Self {
        Self {
            sigma,
            eps,
            qc: FourierSeries::single(1, 1.0, 0.0),
            q1: FourierSeries::single(1, 0.0, 1.0),
            q3: FourierSeries::single(1, 1.0, 0.5),
            a_tilde: FourierSeries::single(1, 0.0, 1.0),
            b_tilde: FourierSeries::single(1, 1.0, 0.0),
        }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }

    pub fn series(&self) -> [(&'static str, &FourierSeries); 5] {
        [
            ("boundary.qc", &self.qc),
            ("boundary.q1", &self.q1),
            ("boundary.q3", &self.q3),
            ("boundary.Atilde", &self.a_tilde),
            ("boundary.Btilde", &self.b_tilde),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid("helical.sigma", format!("need sigma > 0, got {}", self.sigma)));
        }
        if !(self.eps.is_finite() && (0.0..=EPS_MAX).contains(&self.eps)) {
            return Err(Error::invalid(
                "helical.eps",
                format!("need 0 <= eps <= {EPS_MAX}, got {}", self.eps),
            ));
        }
        for (name, s) in self.series() {
            if !s.is_finite() {
                return Err(Error::invalid(name, "coefficients must be finite"));
            }
        }
        let mean = self.q3.mean();
        if mean.abs() > 1e-12 {
            return Err(Error::ZeroMeanViolation { mean });
        }
        Ok(())
    }

    pub fn n_max(&self) -> usize {
        self.series().iter().map(|(_, s)| s.n_max()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_reproduce_values() {
        let s = FourierSeries {
            cos: vec![0.2, 1.0, 0.0, -0.5],
            sin: vec![0.0, 0.3, 0.7],
        };
        let p = 2.5;
        let w = 2.0 * PI / p;
        for x in [0.0, 0.4, 1.7] {
            let mut v = s.coeff(0).re;
            for k in 1..=3 {
                v += 2.0 * (s.coeff(k) * Complex64::from_polar(1.0, k as f64 * w * x)).re;
            }
            assert!((v - s.eval(x, p)).abs() < 1e-14);
        }
    }

    #[test]
    fn antiderivative_differentiates_back() {
        let s = FourierSeries {
            cos: vec![0.0, 1.0, 0.3],
            sin: vec![0.0, -0.2, 0.4],
        };
        let p = 3.0;
        let h = 1e-5;
        for x in [0.3, 1.1, 2.9] {
            let d = (s.antiderivative(x + h, p) - s.antiderivative(x - h, p)) / (2.0 * h);
            assert!((d - s.eval(x, p)).abs() < 1e-8);
        }
        assert_eq!(s.antiderivative(0.0, p), 0.0);
        assert!(s.antiderivative(p, p).abs() < 1e-14);
    }

    #[test]
    fn q3_mean_is_rejected() {
        let mut bc = HelicalBC::single_mode(2.0, 1e-3);
        bc.q3.cos[0] = 1e-6;
        assert!(matches!(bc.validate(), Err(Error::ZeroMeanViolation { .. })));
    }
}

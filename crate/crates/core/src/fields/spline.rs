//! Not-a-knot cubic splines on uniform grids, for real or complex samples.

use std::ops::{Add, Mul, Sub};

use crate::linalg::TridiagonalFactor;

/// Factorization of the not-a-knot second-derivative system for `n` uniform nodes.
///
/// With the not-a-knot ends eliminated, the first and last interior rows decouple
/// (`6 M_1 = d_1`, `6 M_{n-2} = d_{n-2}`) and the remaining system is tridiagonal.
#[derive(Debug, Clone)]
pub struct SplineFactor {
    n: usize,
    factor: TridiagonalFactor,
}

impl SplineFactor {
    pub fn new(n: usize) -> Self {
        assert!(n >= 4, "not-a-knot spline needs at least 4 nodes");
        let m = n - 2;
        let mut lower = vec![1.0; m];
        let mut diag = vec![4.0; m];
        let mut upper = vec![1.0; m];
        diag[0] = 6.0;
        upper[0] = 0.0;
        diag[m - 1] = 6.0;
        lower[m - 1] = 0.0;
        lower[0] = 0.0;
        upper[m - 1] = 0.0;
        Self {
            n,
            factor: TridiagonalFactor::new(&lower, &diag, &upper),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Second derivatives times `h^2` at every node.
    pub fn curvatures<T>(&self, y: &[T]) -> Vec<T>
    where
        T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let n = self.n;
        assert_eq!(y.len(), n);
        let mut d: Vec<T> = (1..n - 1)
            .map(|i| (y[i - 1] - y[i] * 2.0 + y[i + 1]) * 6.0)
            .collect();
        self.factor.solve_in_place(&mut d);
        let mut m = Vec::with_capacity(n);
        m.push(d[0] * 2.0 - d[1]);
        m.extend_from_slice(&d);
        let k = d.len();
        m.push(d[k - 1] * 2.0 - d[k - 2]);
        m
    }
}

/// Cubic spline through uniform samples `y_i = y(x0 + i h)`.
#[derive(Debug, Clone)]
pub struct UniformSpline<T> {
    x0: f64,
    h: f64,
    y: Vec<T>,
    m: Vec<T>,
}

impl<T> UniformSpline<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    pub fn new(x0: f64, h: f64, y: Vec<T>) -> Self {
        let f = SplineFactor::new(y.len());
        Self::with_factor(&f, x0, h, y)
    }

    pub fn with_factor(factor: &SplineFactor, x0: f64, h: f64, y: Vec<T>) -> Self {
        let m = factor.curvatures(&y);
        Self { x0, h, y, m }
    }

    /// Evaluates the spline; arguments outside the node range use the end cubics.
    pub fn eval(&self, x: f64) -> T {
        let n = self.y.len();
        let s = (x - self.x0) / self.h;
        let i = (s.floor() as isize).clamp(0, n as isize - 2) as usize;
        let t = s - i as f64;
        let u = 1.0 - t;
        self.y[i] * u + self.y[i + 1] * t + (self.m[i] * (u * u * u - u) + self.m[i + 1] * (t * t * t - t)) * (1.0 / 6.0)
    }

    /// First derivative of the spline.
    pub fn eval_deriv(&self, x: f64) -> T {
        let n = self.y.len();
        let s = (x - self.x0) / self.h;
        let i = (s.floor() as isize).clamp(0, n as isize - 2) as usize;
        let t = s - i as f64;
        let u = 1.0 - t;
        let inv_h = 1.0 / self.h;
        ((self.y[i + 1] - self.y[i]) + (self.m[i + 1] * (3.0 * t * t - 1.0) - self.m[i] * (3.0 * u * u - 1.0)) * (1.0 / 6.0))
            * inv_h
    }
}

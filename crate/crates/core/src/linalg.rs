//! Tridiagonal solvers used by the elliptic solves and the cubic splines.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

/// Field over which the Thomas algorithm runs.
pub trait Scalar:
    Copy
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + Mul<f64, Output = Self>
{
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Solves the tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`
/// in place (`rhs` is overwritten with `x`). `lower[0]` and `upper[n-1]` are ignored.
///
/// Fails with the row index when a pivot drops below `pivot_floor` times the
/// largest diagonal modulus.
pub fn solve_tridiagonal<T: Scalar>(
    lower: &[T],
    diag: &[T],
    upper: &[T],
    rhs: &mut [T],
    pivot_floor: f64,
) -> Result<(), usize> {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return Ok(());
    }
    let scale = diag.iter().fold(0.0_f64, |m, d| m.max(d.modulus()));
    let floor = pivot_floor * scale.max(f64::MIN_POSITIVE);
    let mut cp = vec![T::zero(); n];
    let mut pivot = diag[0];
    if pivot.modulus() < floor {
        return Err(0);
    }
    cp[0] = upper[0] / pivot;
    rhs[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * cp[i - 1];
        if pivot.modulus() < floor {
            return Err(i);
        }
        if i + 1 < n {
            cp[i] = upper[i] / pivot;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - cp[i] * rhs[i + 1];
    }
    Ok(())
}

/// Prefactored real tridiagonal matrix, reusable for many right-hand sides of
/// any type that is a vector space over the reals.
#[derive(Debug, Clone)]
pub struct TridiagonalFactor {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    cp: Vec<f64>,
}

impl TridiagonalFactor {
    pub fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        let mut cp = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = diag[i] - if i > 0 { lower[i] * prev } else { 0.0 };
            assert!(pivot.abs() > 1e-300, "singular tridiagonal factor");
            inv_pivot[i] = 1.0 / pivot;
            cp[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
            prev = cp[i];
        }
        Self {
            lower: lower.to_vec(),
            inv_pivot,
            cp,
        }
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    pub fn solve_in_place<R>(&self, rhs: &mut [R])
    where
        R: Copy + Sub<Output = R> + Mul<f64, Output = R>,
    {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        rhs[0] = rhs[0] * self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - rhs[i - 1] * self.lower[i]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - rhs[i + 1] * self.cp[i];
        }
    }
}

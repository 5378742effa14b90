//! Row-wise discrete Fourier transforms in the periodic direction.
//!
//! Coefficients are stored as the half spectrum `c_0 ..= c_{N/2}` with the
//! normalization `f_j = sum_k c_k exp(2 pi i j k / N)`. The trigonometric
//! interpolant is `Re c_0 + 2 sum_{0<k<N/2} Re(c_k e^{i w_k eta}) + Re c_{N/2} cos(w_{N/2} eta)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{Array2, ArrayView1, ArrayViewMut1};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Number of stored coefficients for `n` periodic samples.
pub fn half_len(n: usize) -> usize {
    n / 2 + 1
}

/// Half spectrum of one real row.
pub fn forward_row(row: ArrayView1<f64>, out: &mut [Complex64]) {
    let n = row.len();
    let p = plans(n);
    let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    p.forward.process(&mut buf);
    let inv = 1.0 / n as f64;
    for (o, b) in out.iter_mut().zip(buf.iter()) {
        *o = b * inv;
    }
}

/// Real row from a half spectrum; the Nyquist coefficient contributes its real part only.
pub fn inverse_row(coeffs: &[Complex64], mut row: ArrayViewMut1<f64>) {
    let n = row.len();
    let p = plans(n);
    let half = n / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = Complex64::new(coeffs[0].re, 0.0);
    for k in 1..half {
        buf[k] = coeffs[k];
        buf[n - k] = coeffs[k].conj();
    }
    buf[half] = Complex64::new(coeffs[half].re, 0.0);
    p.inverse.process(&mut buf);
    for (r, b) in row.iter_mut().zip(buf.iter()) {
        *r = b.re;
    }
}

/// Half spectra of every row of `values` (rows are radial nodes).
pub fn forward_rows(values: &Array2<f64>) -> Array2<Complex64> {
    let (nr, n) = values.dim();
    let m = half_len(n);
    let mut out = Array2::<Complex64>::zeros((nr, m));
    for (i, row) in values.outer_iter().enumerate() {
        let mut tmp = vec![Complex64::new(0.0, 0.0); m];
        forward_row(row, &mut tmp);
        for (k, c) in tmp.into_iter().enumerate() {
            out[[i, k]] = c;
        }
    }
    out
}

/// Inverse of [`forward_rows`] for rows of length `n`.
pub fn inverse_rows(coeffs: &Array2<Complex64>, n: usize) -> Array2<f64> {
    let nr = coeffs.nrows();
    let mut out = Array2::<f64>::zeros((nr, n));
    for i in 0..nr {
        let row: Vec<Complex64> = coeffs.row(i).to_vec();
        inverse_row(&row, out.row_mut(i));
    }
    out
}

/// Evaluates the trigonometric interpolant of a half spectrum at `eta`, where
/// `omega1 = 2 pi / period`. Only the first `n_active` coefficients are summed
/// (all of them if `n_active >= coeffs.len()`); the last stored coefficient is
/// treated as the Nyquist mode when `nyquist` is true.
pub fn eval_trig(coeffs: &[Complex64], omega1: f64, eta: f64, nyquist: bool) -> f64 {
    let m = coeffs.len();
    if m == 0 {
        return 0.0;
    }
    let mut sum = coeffs[0].re;
    if m == 1 {
        return sum;
    }
    let (s, c) = (omega1 * eta).sin_cos();
    let z = Complex64::new(c, s);
    let mut zk = z;
    let last = if nyquist { m - 1 } else { m };
    let mut acc = 0.0;
    for ck in &coeffs[1..last] {
        acc += ck.re * zk.re - ck.im * zk.im;
        zk *= z;
    }
    sum += 2.0 * acc;
    if nyquist {
        sum += coeffs[m - 1].re * zk.re;
    }
    sum
}

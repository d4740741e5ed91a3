//! Small dense helpers shared by the geometry pipeline.
//!
//! Everything here operates on tiny matrices (n <= 8 chart dimensions,
//! systems of a few hundred rows), so plain loops are fine.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Dense rank-3 array with all three index ranges equal to `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, value: f64) {
        self.data[(a * self.n + b) * self.n + c] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Lower-triangular Cholesky factor of a symmetric matrix, rejecting the
/// input when any pivot drops to `pivot_tol` or below. The offending pivot
/// is returned on failure.
pub fn cholesky(m: &DMatrix<f64>, pivot_tol: f64) -> Result<DMatrix<f64>, f64> {
    let n = m.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if !(sum > pivot_tol) {
                    return Err(sum);
                }
                l[(i, j)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solve `L x = b` for lower-triangular `L`.
pub fn solve_lower(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in 0..n {
        for k in 0..i {
            let t = l[(i, k)] * x[k];
            x[i] -= t;
        }
        x[i] /= l[(i, i)];
    }
    x
}

/// Solve `L^T x = b` for lower-triangular `L`.
pub fn solve_lower_transpose(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    for i in (0..n).rev() {
        for k in i + 1..n {
            let t = l[(k, i)] * x[k];
            x[i] -= t;
        }
        x[i] /= l[(i, i)];
    }
    x
}

/// Inverse of a symmetric positive-definite matrix through its Cholesky
/// factor.
pub fn spd_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::<f64>::zeros(n);
        e[j] = 1.0;
        let y = solve_lower(l, &e);
        let x = solve_lower_transpose(l, &y);
        inv.set_column(j, &x);
    }
    // Symmetrize to wash out the last bits of round-off.
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = s;
            inv[(j, i)] = s;
        }
    }
    inv
}

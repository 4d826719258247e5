//! Small linear-algebra layer: banded LU (real and complex) and thin wrappers
//! over faer for dense eigen/SVD work.

mod arnoldi;
mod band;

pub use arnoldi::{merge_pairs, pair_residual, shift_invert, EigenPair};
pub use band::{BandError, BandLu, BandMatrix};

use faer::Mat;
use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Field:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn from_f64(x: f64) -> Self;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

pub fn dot<T: Field>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn cnorm2(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues of a small complex matrix given row-major.
pub fn complex_eigenvalues(rows: &[Vec<Complex64>]) -> Option<Vec<Complex64>> {
    let n = rows.len();
    let m = Mat::<Complex64>::from_fn(n, n, |i, j| rows[i][j]);
    m.eigenvalues().ok()
}

/// Eigen-decomposition of a real dense matrix: eigenvalues and column eigenvectors.
pub fn real_eigen(rows: &[Vec<f64>]) -> Option<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    let n = rows.len();
    let m = Mat::<f64>::from_fn(n, n, |i, j| rows[i][j]);
    let e = m.eigen().ok()?;
    let s = e.S();
    let u = e.U();
    let vals: Vec<Complex64> = (0..n).map(|i| s[i]).collect();
    let vecs: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| u[(i, j)]).collect()).collect();
    Some((vals, vecs))
}

/// Least squares `min |A x - b|` for a tall dense system (columns given).
/// Returns the solution and the 2-norm condition number of `A`.
pub fn lstsq(cols: &[Vec<f64>], b: &[f64]) -> Option<(Vec<f64>, f64)> {
    let m = b.len();
    let n = cols.len();
    let a = Mat::<f64>::from_fn(m, n, |i, j| cols[j][i]);
    let svd = a.thin_svd().ok()?;
    let s = svd.S();
    let smax = (0..n).map(|i| s[i]).fold(0.0, f64::max);
    let smin = (0..n).map(|i| s[i]).fold(f64::INFINITY, f64::min);
    let u = svd.U();
    let v = svd.V();
    let mut x = vec![0.0; n];
    for k in 0..n {
        if s[k] <= smax * 1e-15 {
            continue;
        }
        let ub: f64 = (0..m).map(|i| u[(i, k)] * b[i]).sum();
        let c = ub / s[k];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += v[(j, k)] * c;
        }
    }
    Some((x, smax / smin))
}

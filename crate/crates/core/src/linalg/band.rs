//! Banded storage with partial-pivoting LU.
//!
//! Row `i` keeps columns `i - kl ..= i + ku + kl`; the extra `kl` super-diagonals
//! hold the fill-in produced by row interchanges.

use super::Field;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum BandError {
    #[error("zero pivot at row {0}")]
    Singular(usize),
    #[error("entry ({row}, {col}) lies outside the band (kl={kl}, ku={ku})")]
    OutOfBand { row: usize, col: usize, kl: usize, ku: usize },
}

#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Field> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![T::zero(); n * width] }
    }

    /// Build from triplets, sizing the band to fit.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, T)]) -> Self {
        let mut kl = 0;
        let mut ku = 0;
        for &(i, j, _) in entries {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let mut m = Self::zeros(n, kl, ku);
        for &(i, j, v) in entries {
            m.add(i, j, v);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn kl(&self) -> usize {
        self.kl
    }
    pub fn ku(&self) -> usize {
        self.ku
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            T::zero()
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "{}", BandError::OutOfBand { row: i, col: j, kl: self.kl, ku: self.ku });
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "{}", BandError::OutOfBand { row: i, col: j, kl: self.kl, ku: self.ku });
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Column range of row `i` inside the band.
    #[inline]
    pub fn row_cols(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut s = T::zero();
                for j in self.row_cols(i) {
                    s += self.data[self.idx(i, j)] * x[j];
                }
                s
            })
            .collect()
    }

    pub fn matvec_transpose(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            for j in self.row_cols(i) {
                y[j] += self.data[self.idx(i, j)] * x[i];
            }
        }
        y
    }

    /// `self - s * I`, same band.
    pub fn shifted(&self, s: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            let k = m.idx(i, i);
            m.data[k] -= s;
        }
        m
    }

    /// `D_l * self * D_r` for diagonal scalings.
    pub fn scaled(&self, left: &[f64], right: &[f64]) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            for j in self.row_cols(i) {
                let k = m.idx(i, j);
                m.data[k] = m.data[k].scale(left[i] * right[j]);
            }
        }
        m
    }

    pub fn map<U: Field>(&self, f: impl Fn(T) -> U) -> BandMatrix<U> {
        BandMatrix { n: self.n, kl: self.kl, ku: self.ku, width: self.width, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn lu(&self) -> Result<BandLu<T>, BandError> {
        BandLu::factor(self.clone())
    }
}

/// LU factors in LINPACK order: `U = L_{n-1} P_{n-1} ... L_0 P_0 A`.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    a: BandMatrix<T>,
    piv: Vec<usize>,
}

impl<T: Field> BandLu<T> {
    pub fn factor(mut a: BandMatrix<T>) -> Result<Self, BandError> {
        let n = a.n;
        let (kl, ku) = (a.kl, a.ku);
        let mut piv = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a.data[a.idx(k, k)].modulus();
            for i in k + 1..=last_row {
                let v = a.data[a.idx(i, k)].modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best == 0.0 || !best.is_finite() {
                return Err(BandError::Singular(k));
            }
            let last_col = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (ik, ip) = (a.idx(k, j), a.idx(p, j));
                    a.data.swap(ik, ip);
                }
            }
            let pivot = a.data[a.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = a.idx(i, k);
                let l = a.data[ik] / pivot;
                a.data[ik] = l;
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..=last_col {
                    let kj = a.data[a.idx(k, j)];
                    let ij = a.idx(i, j);
                    a.data[ij] -= l * kj;
                }
            }
        }
        Ok(Self { a, piv })
    }

    pub fn n(&self) -> usize {
        self.a.n
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let a = &self.a;
        let n = a.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == T::zero() {
                continue;
            }
            for i in k + 1..=(k + a.kl).min(n - 1) {
                b[i] -= a.data[a.idx(i, k)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + a.ku + a.kl).min(n - 1) {
                s -= a.data[a.idx(i, j)] * b[j];
            }
            b[i] = s / a.data[a.idx(i, i)];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solve `A^T x = b` (plain transpose, no conjugation).
    pub fn solve_transpose_in_place(&self, b: &mut [T]) {
        let a = &self.a;
        let n = a.n;
        assert_eq!(b.len(), n);
        let w = a.ku + a.kl;
        for j in 0..n {
            let mut s = b[j];
            for i in j.saturating_sub(w)..j {
                s -= a.data[a.idx(i, j)] * b[i];
            }
            b[j] = s / a.data[a.idx(j, j)];
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in k + 1..=(k + a.kl).min(n - 1) {
                s -= a.data[a.idx(i, k)] * b[i];
            }
            b[k] = s;
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
        }
    }

    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_transpose_in_place(&mut x);
        x
    }
}

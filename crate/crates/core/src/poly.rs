//! Dense polynomials in one variable with complex coefficients.

use crate::linalg::complex_eigenvalues;
use num_complex::Complex64;

/// Coefficients in ascending order: `c[0] + c[1] z + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub c: Vec<Complex64>,
}

impl Poly {
    pub fn new(c: Vec<Complex64>) -> Self {
        Self { c }
    }

    pub fn from_real(c: &[f64]) -> Self {
        Self { c: c.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn degree(&self) -> usize {
        self.c.iter().rposition(|v| *v != Complex64::new(0.0, 0.0)).unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    pub fn derivative(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly { c: vec![Complex64::new(0.0, 0.0)] };
        }
        Poly { c: self.c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect() }
    }

    /// All roots via the companion matrix, each polished by a few Newton steps.
    pub fn roots(&self) -> Option<Vec<Complex64>> {
        let deg = self.degree();
        if deg == 0 {
            return Some(Vec::new());
        }
        let lead = self.c[deg];
        let mut comp = vec![vec![Complex64::new(0.0, 0.0); deg]; deg];
        for j in 0..deg {
            comp[0][j] = -self.c[deg - 1 - j] / lead;
        }
        for i in 1..deg {
            comp[i][i - 1] = Complex64::new(1.0, 0.0);
        }
        let mut r = complex_eigenvalues(&comp)?;
        let dp = self.derivative();
        for z in r.iter_mut() {
            for _ in 0..3 {
                let d = dp.eval(*z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = self.eval(*z) / d;
                if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 1e-3 * (1.0 + z.norm()) {
                    break;
                }
                *z -= step;
            }
        }
        Some(r)
    }
}

//! Shift-invert Arnoldi for a few eigenpairs of a real banded matrix near a real shift.

use super::{real_eigen, BandError, BandMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    /// Unit 2-norm eigenvector.
    pub vector: Vec<Complex64>,
    /// `‖A x − λ x‖₂` for the unit vector.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cmatvec(a: &BandMatrix<f64>, x: &[Complex64]) -> Vec<Complex64> {
    let re: Vec<f64> = x.iter().map(|z| z.re).collect();
    let im: Vec<f64> = x.iter().map(|z| z.im).collect();
    let ar = a.matvec(&re);
    let ai = a.matvec(&im);
    ar.into_iter().zip(ai).map(|(r, i)| Complex64::new(r, i)).collect()
}

/// Residual of a candidate pair for a real banded matrix.
pub fn pair_residual(a: &BandMatrix<f64>, lambda: Complex64, x: &[Complex64]) -> f64 {
    let ax = cmatvec(a, x);
    let nx = super::cnorm2(x);
    ax.iter().zip(x).map(|(y, v)| (y - lambda * v).norm_sqr()).sum::<f64>().sqrt() / nx
}

/// Ritz pairs of `(A − σ)⁻¹` mapped back to `A`, keeping those with
/// residual below `tol·max(1, |λ|)`.
pub fn shift_invert(a: &BandMatrix<f64>, shift: f64, krylov: usize, tol: f64, seed: u64) -> Result<Vec<EigenPair>, BandError> {
    let n = a.n();
    let k = krylov.min(n);
    let lu = a.shifted(shift).lu()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v0: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let nrm = dot(&v0, &v0).sqrt();
    v0.iter_mut().for_each(|x| *x /= nrm);
    let mut basis = vec![v0];
    let mut h = vec![vec![0.0; k]; k + 1];
    let mut dim = k;
    for j in 0..k {
        let mut w = lu.solve(&basis[j]);
        for _ in 0..2 {
            for (i, b) in basis.iter().enumerate() {
                let c = dot(b, &w);
                h[i][j] += c;
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = dot(&w, &w).sqrt();
        h[j + 1][j] = beta;
        if beta < 1e-12 * h.iter().take(j + 1).map(|r| r[j].abs()).fold(1e-300, f64::max) {
            dim = j + 1;
            break;
        }
        if j + 1 < k {
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(w);
        }
    }
    let rows: Vec<Vec<f64>> = (0..dim).map(|i| h[i][..dim].to_vec()).collect();
    let Some((theta, ys)) = real_eigen(&rows) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for (t, y) in theta.iter().zip(&ys) {
        if t.norm() < 1e-300 {
            continue;
        }
        let lambda = Complex64::new(shift, 0.0) + 1.0 / t;
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (b, yj) in basis.iter().zip(y) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += yj * bi;
            }
        }
        let nx = super::cnorm2(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let residual = pair_residual(a, lambda, &x);
        if residual <= tol * lambda.norm().max(1.0) {
            out.push(EigenPair { value: lambda, vector: x, residual });
        }
    }
    Ok(out)
}

/// Merge pair lists from several shifts, dropping duplicates (keeps the smaller residual).
pub fn merge_pairs(lists: Vec<Vec<EigenPair>>, tol: f64) -> Vec<EigenPair> {
    let mut out: Vec<EigenPair> = Vec::new();
    for p in lists.into_iter().flatten() {
        match out.iter_mut().find(|q| (q.value - p.value).norm() < tol * (1.0 + p.value.norm())) {
            Some(q) => {
                if p.residual < q.residual {
                    *q = p;
                }
            }
            None => out.push(p),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_dirichlet_laplacian_modes() {
        let n = 400;
        let h = 1.0 / (n + 1) as f64;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, -2.0 / (h * h)));
            if i > 0 {
                t.push((i, i - 1, 1.0 / (h * h)));
            }
            if i + 1 < n {
                t.push((i, i + 1, 1.0 / (h * h)));
            }
        }
        let a = BandMatrix::from_triplets(n, &t);
        let pairs = shift_invert(&a, 0.0, 30, 1e-8, 1).unwrap();
        for k in 1..=5 {
            let exact = -4.0 / (h * h) * (k as f64 * std::f64::consts::PI * h / 2.0).sin().powi(2);
            assert!(pairs.iter().any(|p| (p.value.re - exact).abs() < 1e-8 * exact.abs() && p.value.im.abs() < 1e-8), "mode {k}");
        }
    }

    #[test]
    fn complex_pair_of_rotation_block() {
        // block diag of a rotation-scaling [[a, -b],[b, a]] and a chain of reals
        let n = 20;
        let mut t = vec![(0, 0, 0.3), (0, 1, -2.0), (1, 0, 2.0), (1, 1, 0.3)];
        for i in 2..n {
            t.push((i, i, -(i as f64)));
        }
        let a = BandMatrix::from_triplets(n, &t);
        let pairs = shift_invert(&a, 0.5, 20, 1e-10, 3).unwrap();
        assert!(pairs.iter().any(|p| (p.value - Complex64::new(0.3, 2.0)).norm() < 1e-10));
        assert!(pairs.iter().any(|p| (p.value - Complex64::new(0.3, -2.0)).norm() < 1e-10));
    }
}

//! Weighted linearization about the critical front: eigenvalue scan, resonance
//! function E(γ) and the pushed/pulled classification.

use crate::dispersion::{find_pinched_double_root, sigma_minus, sigma_plus, DispersionError, PinchResult};
use crate::fd::{central_weights, operator_stencil};
use crate::front::{allow_wrong_tail_sign, far_field_fix, solve_front, FrontError, FrontProfile};
use crate::interp::UniformGrid;
use crate::linalg::{merge_pairs, real_eigen, shift_invert, BandLu, BandMatrix, EigenPair};
use crate::model::{Family, ModelSpec};
use crate::weights::Weights;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const LOCALIZATION_THRESHOLD: f64 = 0.8;
pub const ENLARGEMENT_TOL: f64 = 1e-4;
pub const KERNEL_TOL: f64 = 1e-6;
/// |E(0)| below this counts as a resonance.
pub const RESONANCE_FLOOR: f64 = 1e-6;
const DENSE_MAX: usize = 1000;
const KRYLOV_DIM: usize = 80;
const RITZ_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectrumError {
    #[error("grid too coarse: {n} points for a stencil of half-width {hw}")]
    GridTooCoarse { n: usize, hw: usize },
    #[error("eigensolver failure: {0}")]
    EigensolverFailure(String),
    #[error("adjoint kernel is not one-dimensional (singular values {0:.3e}, {1:.3e})")]
    AdjointKernelNotOneDimensional(f64, f64),
    #[error("no adjoint kernel: smallest singular value {0:.3e}")]
    NoAdjointKernel(f64),
    #[error("bordered system singular")]
    BorderedSingular,
    #[error("operator has no front attached")]
    NoSource,
    #[error("E(0) has the same sign at {0} and {1}")]
    NoSignChange(f64, f64),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Front(#[from] FrontError),
    #[error("at delta = {delta}: {source}")]
    AtParameter { delta: f64, source: Box<SpectrumError> },
}

/// Front data an operator was assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSource {
    pub spec: ModelSpec,
    pub pinch: PinchResult,
    pub profile: FrontProfile,
}

#[derive(Debug, Clone)]
pub struct WeightedOperator {
    pub grid: UniformGrid,
    pub matrix: BandMatrix<f64>,
    /// Conjugated stencil data for rows and off-grid evaluation; absent for fixtures.
    pub closure: Option<Closure>,
    pub source: Option<OperatorSource>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Closure {
    pub eta_star: f64,
    pub order_half: usize,
    /// Stencil of `P(∂x) + c ∂x`.
    pub stencil: Vec<f64>,
    pub fprime: Vec<f64>,
    pub fprime_zero: f64,
    pub tail_fix: (f64, f64),
}

impl Closure {
    fn weights(&self) -> Weights {
        Weights::new(self.eta_star, self.order_half)
    }
    fn hw(&self) -> usize {
        self.stencil.len() / 2
    }
}

/// Assemble `L = ω (P(∂x) + c ∂x + f'(q*)) ω⁻¹` with Dirichlet truncation at both ends.
/// The profile is evaluated in its phase frame (q*(0) = u_minus/2).
pub fn build_weighted_operator(spec: &ModelSpec, pinch: &PinchResult, profile: &FrontProfile, grid: &UniformGrid) -> Result<WeightedOperator, SpectrumError> {
    let h = grid.h();
    let mut coeffs: Vec<f64> = (0..=spec.degree()).map(|k| spec.p_coeff(k)).collect();
    coeffs[1] += pinch.c_star;
    let (hw, stencil) = operator_stencil(&coeffs, h);
    if grid.n < 4 * hw + 2 {
        return Err(SpectrumError::GridTooCoarse { n: grid.n, hw });
    }
    let fprime: Vec<f64> = grid.xs().iter().map(|&x| spec.df(profile.eval_phase(x))).collect();
    let closure = Closure {
        eta_star: pinch.eta_star,
        order_half: spec.order_half,
        tail_fix: far_field_fix(&stencil, h, pinch.eta_star, spec.df(0.0)),
        stencil,
        fprime,
        fprime_zero: spec.df(0.0),
    };
    let matrix = assemble(grid, &closure, false);
    Ok(WeightedOperator {
        grid: *grid,
        matrix,
        closure: Some(closure),
        source: Some(OperatorSource { spec: spec.clone(), pinch: pinch.clone(), profile: profile.clone() }),
    })
}

fn assemble(grid: &UniformGrid, cl: &Closure, far_field: bool) -> BandMatrix<f64> {
    let n = grid.n;
    let hw = cl.hw() as i64;
    let w = cl.weights();
    let logw: Vec<f64> = (-hw..n as i64 + hw).map(|j| w.log_omega(grid.x0 + j as f64 * grid.h())).collect();
    let lg = |j: i64| logw[(j + hw) as usize];
    let d1 = central_weights(1, grid.h());
    let mut t = Vec::with_capacity(n * (2 * hw as usize + 1));
    for i in 0..n {
        let ii = i as i64;
        let x = grid.x(i);
        let chi = if far_field { 1.0 } else { w.chi_plus(x) };
        for off in -hw..=hw {
            let j = ii + off;
            if j < 0 || j >= n as i64 {
                continue;
            }
            let ratio = if far_field { (-cl.eta_star * off as f64 * grid.h()).exp() } else { (lg(ii) - lg(j)).exp() };
            let mut v = cl.stencil[(off + hw) as usize] * ratio;
            if off.abs() <= 2 {
                v += chi * cl.tail_fix.1 * d1[(off + 2) as usize];
            }
            if off == 0 {
                v += chi * cl.tail_fix.0 + if far_field { cl.fprime_zero } else { cl.fprime[i] };
            }
            if v != 0.0 {
                t.push((i, j as usize, v));
            }
        }
    }
    BandMatrix::from_triplets(n, &t)
}

impl WeightedOperator {
    /// Operator given directly by a matrix (no front attached).
    pub fn from_matrix(grid: UniformGrid, matrix: BandMatrix<f64>) -> Self {
        Self { grid, matrix, closure: None, source: None }
    }

    /// The constant-coefficient far-field operator `L⁺` on the same grid.
    pub fn far_field(&self) -> Option<BandMatrix<f64>> {
        self.closure.as_ref().map(|c| assemble(&self.grid, c, true))
    }

    /// `e^{η h(x)} L e^{−η h(x)}` with the smooth blend `h` of the weight.
    pub fn rescaled(&self, eta: f64) -> BandMatrix<f64> {
        let order = self.closure.as_ref().map_or(1, |c| c.order_half);
        let w = Weights::new(eta, order);
        let left: Vec<f64> = self.grid.xs().iter().map(|&x| w.omega(x)).collect();
        let right: Vec<f64> = left.iter().map(|v| 1.0 / v).collect();
        self.matrix.scaled(&left, &right)
    }

    /// Same front and parameters on a domain scaled by `factor` with equal spacing.
    pub fn enlarged(&self, factor: f64) -> Result<Self, SpectrumError> {
        let src = self.source.as_ref().ok_or(SpectrumError::NoSource)?;
        let h = self.grid.h();
        let x0 = self.grid.x0 * factor;
        let x1 = self.grid.x1 * factor;
        let n = ((x1 - x0) / h).round() as usize + 1;
        build_weighted_operator(&src.spec, &src.pinch, &src.profile, &UniformGrid::new(x0, x1, n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    PointSpectrum,
    EssentialArtifact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub re: f64,
    pub im: f64,
    pub score: f64,
    pub classification: Classification,
    /// |Δλ| under 20% domain enlargement, when it was evaluated.
    pub enlargement_shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigReport {
    pub margin: f64,
    pub method: String,
    pub candidates: Vec<Candidate>,
    /// E(0) as (re, im), when a front is attached.
    pub resonance_value: Option<(f64, f64)>,
    pub verdict: bool,
}

impl EigReport {
    pub fn unstable_point_spectrum(&self) -> Vec<&Candidate> {
        self.candidates.iter().filter(|c| c.classification == Classification::PointSpectrum && c.re >= 0.0).collect()
    }
}

/// Mass fraction of an orthonormalized cluster basis in the middle half of the grid.
fn cluster_score(vectors: &[&Vec<Complex64>]) -> f64 {
    let n = vectors[0].len();
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in vectors {
        let mut w = (*v).clone();
        for _ in 0..2 {
            for b in &basis {
                let c: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                w.iter_mut().zip(b).for_each(|(y, x)| *y -= c * x);
            }
        }
        let nw = crate::linalg::cnorm2(&w);
        if nw > 1e-8 {
            w.iter_mut().for_each(|y| *y /= nw);
            basis.push(w);
        }
    }
    let (lo, hi) = (n / 4, n - n / 4);
    let mid: f64 = basis.iter().map(|b| b[lo..hi].iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
    mid / basis.len().max(1) as f64
}

fn dense_pairs(m: &BandMatrix<f64>) -> Result<Vec<EigenPair>, SpectrumError> {
    let (vals, vecs) = real_eigen(&m.to_dense()).ok_or_else(|| SpectrumError::EigensolverFailure("dense eigen".into()))?;
    Ok(vals
        .into_iter()
        .zip(vecs)
        .map(|(value, mut vector)| {
            let nv = crate::linalg::cnorm2(&vector);
            if nv > 0.0 {
                vector.iter_mut().for_each(|z| *z /= nv);
            }
            EigenPair { value, vector, residual: 0.0 }
        })
        .collect())
}

/// Shifts covering the real segment [−margin, 1].
fn scan_shifts(margin: f64) -> Vec<f64> {
    vec![-0.5 * margin - 1e-3, 0.013, 0.2, 0.5, 0.9]
}

fn sparse_pairs(m: &BandMatrix<f64>, shifts: &[f64], krylov: usize, seed: u64) -> Result<Vec<EigenPair>, SpectrumError> {
    let lists = shifts
        .iter()
        .enumerate()
        .map(|(k, &s)| shift_invert(m, s, krylov, RITZ_TOL, seed.wrapping_add(k as u64)).map_err(|e| SpectrumError::EigensolverFailure(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_pairs(lists, 1e-9))
}

/// Eigenvalue of `m` closest to `target` by shift-invert.
fn nearest_eigenvalue(m: &BandMatrix<f64>, target: Complex64, seed: u64) -> Result<Option<Complex64>, SpectrumError> {
    let pairs = sparse_pairs(m, &[target.re + 1e-6], 40, seed)?;
    Ok(pairs.into_iter().map(|p| p.value).min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm())))
}

/// Default seed for the Arnoldi starting vectors.
pub const SCAN_SEED: u64 = 17;

/// Candidates with Re λ ≥ −margin, classified by localization and domain enlargement.
pub fn eigenvalue_scan(op: &WeightedOperator, margin: f64) -> Result<EigReport, SpectrumError> {
    eigenvalue_scan_seeded(op, margin, SCAN_SEED)
}

/// As [`eigenvalue_scan`], with the Krylov starting vectors drawn from `seed`.
pub fn eigenvalue_scan_seeded(op: &WeightedOperator, margin: f64, seed: u64) -> Result<EigReport, SpectrumError> {
    let n = op.grid.n;
    let (pairs, method) = if n <= DENSE_MAX {
        (dense_pairs(&op.matrix)?, "dense")
    } else {
        (sparse_pairs(&op.matrix, &scan_shifts(margin), KRYLOV_DIM, seed)?, "shift-invert")
    };
    let mut pairs: Vec<&EigenPair> = pairs.iter().filter(|p| p.value.re >= -margin).collect();
    pairs.sort_by(|a, b| b.value.re.total_cmp(&a.value.re).then(a.value.im.total_cmp(&b.value.im)));
    let enlarged = match &op.source {
        Some(_) => Some(op.enlarged(1.2)?),
        None => None,
    };
    let mut candidates = Vec::new();
    for p in &pairs {
        let cluster: Vec<&Vec<Complex64>> =
            pairs.iter().filter(|q| (q.value - p.value).norm() <= 1e-8 * (1.0 + p.value.norm())).map(|q| &q.vector).collect();
        let score = cluster_score(&cluster).clamp(0.0, 1.0);
        let mut classification = Classification::EssentialArtifact;
        let mut enlargement_shift = None;
        if score >= LOCALIZATION_THRESHOLD {
            if let Some(big) = &enlarged {
                let moved = nearest_eigenvalue(&big.matrix, p.value, seed)?.map_or(f64::INFINITY, |z| (z - p.value).norm());
                enlargement_shift = Some(moved);
                if moved < ENLARGEMENT_TOL {
                    classification = Classification::PointSpectrum;
                }
            } else {
                classification = Classification::PointSpectrum;
            }
        }
        candidates.push(Candidate { re: p.value.re, im: p.value.im, score, classification, enlargement_shift });
    }
    let resonance_value = match &op.source {
        Some(src) => Some(resonance_function(op, &src.spec, &src.pinch, Complex64::new(0.0, 0.0))?),
        None => None,
    };
    let unstable = candidates.iter().any(|c| c.classification == Classification::PointSpectrum && c.re >= 0.0);
    let verdict = !unstable && resonance_value.is_none_or(|e| e.norm() > RESONANCE_FLOOR);
    Ok(EigReport {
        margin,
        method: method.into(),
        candidates,
        resonance_value: resonance_value.map(|e| (e.re, e.im)),
        verdict,
    })
}

/// Adjoint kernel data of the scaled operator at γ = 0.
pub struct ResonanceContext {
    scaled: BandMatrix<f64>,
    scale: Vec<f64>,
    phi: Vec<f64>,
    psi: Vec<f64>,
    pub sigma_min: f64,
    pub sigma_second: f64,
    pub eta_hat: f64,
}

/// Default exponential row scaling for the resonance computation.
pub fn default_eta_hat(eta_star: f64) -> f64 {
    (eta_star / 4.0).min(0.2)
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    n
}

fn dotr(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ResonanceContext {
    pub fn new(op: &WeightedOperator, eta_hat: f64) -> Result<Self, SpectrumError> {
        let cl = op.closure.as_ref().ok_or(SpectrumError::NoSource)?;
        let w = Weights::new(eta_hat, cl.order_half);
        let scale: Vec<f64> = op.grid.xs().iter().map(|&x| w.omega(x)).collect();
        let inv: Vec<f64> = scale.iter().map(|v| 1.0 / v).collect();
        let scaled = op.matrix.scaled(&scale, &inv);
        let lu = scaled.lu().map_err(|_| SpectrumError::BorderedSingular)?;
        let n = op.grid.n;
        // inverse iteration with (M Mᵀ)⁻¹ = M⁻ᵀ M⁻¹ for the left singular vector
        let inv_gram = |lu: &BandLu<f64>, v: &[f64]| {
            let mut y = v.to_vec();
            lu.solve_in_place(&mut y);
            lu.solve_transpose_in_place(&mut y);
            y
        };
        let mut phi: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.37).sin()).collect();
        normalize(&mut phi);
        let mut growth = 0.0;
        for _ in 0..12 {
            phi = inv_gram(&lu, &phi);
            growth = normalize(&mut phi);
        }
        let sigma_min = 1.0 / growth.sqrt();
        let mut second: Vec<f64> = (0..n).map(|i| (i as f64 * 0.71).cos()).collect();
        let mut growth2 = 0.0;
        for _ in 0..12 {
            let c = dotr(&second, &phi);
            second.iter_mut().zip(&phi).for_each(|(s, p)| *s -= c * p);
            normalize(&mut second);
            second = inv_gram(&lu, &second);
            let c = dotr(&second, &phi);
            second.iter_mut().zip(&phi).for_each(|(s, p)| *s -= c * p);
            growth2 = normalize(&mut second);
        }
        let sigma_second = 1.0 / growth2.sqrt();
        if sigma_second < KERNEL_TOL {
            return Err(SpectrumError::AdjointKernelNotOneDimensional(sigma_min, sigma_second));
        }
        if sigma_min >= KERNEL_TOL {
            return Err(SpectrumError::NoAdjointKernel(sigma_min));
        }
        let mid = op.grid.nearest(0.0);
        let left_sum: f64 = phi[..mid].iter().sum();
        if left_sum < 0.0 {
            phi.iter_mut().for_each(|v| *v = -*v);
        }
        let mut psi = lu.solve(&phi);
        normalize(&mut psi);
        Ok(Self { scaled, scale, phi, psi, sigma_min, sigma_second, eta_hat })
    }

    /// `E(γ) = ⟨(L − γ²)(w + χ₊ e^{ν⁻(γ) x}), φ⟩` with w from the bordered solve.
    pub fn eval(&self, op: &WeightedOperator, alpha: f64, gamma: Complex64) -> Result<Complex64, SpectrumError> {
        let cl = op.closure.as_ref().ok_or(SpectrumError::NoSource)?;
        let lam = gamma * gamma;
        let nu = nu_minus(op, alpha, gamma);
        let r = forcing(op, cl, nu, lam);
        let rt: Vec<Complex64> = r.iter().zip(&self.scale).map(|(v, s)| v * s).collect();
        let mprime = self.scaled.map(|v| Complex64::new(v, 0.0)).shifted(lam);
        let lu = mprime.lu().map_err(|_| SpectrumError::BorderedSingular)?;
        let y1 = lu.solve(&rt.iter().map(|v| -v).collect::<Vec<_>>());
        let phic: Vec<Complex64> = self.phi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let y2 = lu.solve(&phic);
        let p1: Complex64 = self.psi.iter().zip(&y1).map(|(a, b)| b * a).sum();
        let p2: Complex64 = self.psi.iter().zip(&y2).map(|(a, b)| b * a).sum();
        if p2.norm() < 1e-300 {
            return Err(SpectrumError::BorderedSingular);
        }
        let s = -p1 / p2;
        let wt: Vec<Complex64> = y1.iter().zip(&y2).map(|(a, b)| a + s * b).collect();
        let mw = mprime.matvec(&wt);
        // L² pairing with ‖φ‖_{L²} = 1, so E does not depend on the grid spacing
        let pairing: Complex64 = mw.iter().zip(&rt).zip(&self.phi).map(|((a, b), p)| (a + b) * p).sum();
        Ok(pairing * op.grid.h().sqrt())
    }
}

/// Discrete far-field symbol of L⁺ at ν, including the tail correction.
fn far_symbol(cl: &Closure, h: f64, nu: Complex64) -> (Complex64, Complex64) {
    let hw = cl.hw() as i64;
    let d1 = central_weights(1, h);
    let mut s = Complex64::new(cl.fprime_zero + cl.tail_fix.0, 0.0);
    let mut ds = Complex64::new(0.0, 0.0);
    for off in -hw..=hw {
        let o = off as f64 * h;
        let mut c = cl.stencil[(off + hw) as usize] * (-cl.eta_star * o).exp();
        if off.abs() <= 2 {
            c += cl.tail_fix.1 * d1[(off + 2) as usize];
        }
        let e = (nu * o).exp();
        s += c * e;
        ds += c * o * e;
    }
    (s, ds)
}

/// Root of the discrete far-field symbol `S_h(ν) = γ²` branching as −γ/√α.
pub fn nu_minus(op: &WeightedOperator, alpha: f64, gamma: Complex64) -> Complex64 {
    let Some(cl) = op.closure.as_ref() else { return -gamma / alpha.sqrt() };
    if gamma.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let lam = gamma * gamma;
    let mut nu = -gamma / alpha.sqrt();
    for _ in 0..40 {
        let (s, ds) = far_symbol(cl, op.grid.h(), nu);
        let step = (s - lam) / ds;
        nu -= step;
        if step.norm() < 1e-15 * (1.0 + nu.norm()) {
            break;
        }
    }
    nu
}

/// `(L − λ)(χ₊ e^{ν x})` on the grid with exact off-grid values.
fn forcing(op: &WeightedOperator, cl: &Closure, nu: Complex64, lam: Complex64) -> Vec<Complex64> {
    let g = &op.grid;
    let h = g.h();
    let hw = cl.hw() as i64;
    let w = cl.weights();
    let d1 = central_weights(1, h);
    let val = |x: f64| w.chi_plus(x) * (nu * x).exp();
    (0..g.n)
        .map(|i| {
            let x = g.x(i);
            let lx = w.log_omega(x);
            let chi = w.chi_plus(x);
            let mut s = Complex64::new(0.0, 0.0);
            for off in -hw..=hw {
                let y = x + off as f64 * h;
                let mut c = cl.stencil[(off + hw) as usize] * (lx - w.log_omega(y)).exp();
                if off.abs() <= 2 {
                    c += chi * cl.tail_fix.1 * d1[(off + 2) as usize];
                }
                s += c * val(y);
            }
            s + (cl.fprime[i] + chi * cl.tail_fix.0 - lam) * val(x)
        })
        .collect()
}

/// Resonance function at γ with the default scaling.
pub fn resonance_function(op: &WeightedOperator, _spec: &ModelSpec, pinch: &PinchResult, gamma: Complex64) -> Result<Complex64, SpectrumError> {
    let ctx = ResonanceContext::new(op, default_eta_hat(pinch.eta_star))?;
    ctx.eval(op, pinch.alpha, gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSettings {
    /// Operator domain; `None` picks [−60, max(100, 16/η̂)].
    pub domain: Option<(f64, f64)>,
    pub n: usize,
    pub front_domain: (f64, f64),
    pub front_n: usize,
    pub margin: f64,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self { domain: None, n: 3200, front_domain: (-60.0, 100.0), front_n: 8000, margin: 0.05 }
    }
}

/// Pinch, front and weighted operator for one model.
pub fn prepare_operator(spec: &ModelSpec, settings: &SpectrumSettings) -> Result<WeightedOperator, SpectrumError> {
    let pinch = find_pinched_double_root(spec)?;
    let profile = allow_wrong_tail_sign(solve_front(spec, &pinch, settings.front_domain, settings.front_n))?;
    let (x0, x1) = settings.domain.unwrap_or((-60.0, 100f64.max(16.0 / default_eta_hat(pinch.eta_star))));
    // keep the spacing of the default 3200-point grid on [−60, 100] when the domain grows
    let n = if settings.domain.is_none() { ((x1 - x0) / 160.0 * (settings.n - 1) as f64).round() as usize + 1 } else { settings.n };
    build_weighted_operator(spec, &pinch, &profile, &UniformGrid::new(x0, x1, n))
}

/// E(0, δ) along a family.
pub fn resonance_at(family: &Family, delta: f64, settings: &SpectrumSettings) -> Result<f64, SpectrumError> {
    let wrap = |e| SpectrumError::AtParameter { delta, source: Box::new(e) };
    let op = prepare_operator(&family.at(delta), settings).map_err(wrap)?;
    let src = op.source.as_ref().expect("built from a front");
    let e = resonance_function(&op, &src.spec, &src.pinch, Complex64::new(0.0, 0.0)).map_err(wrap)?;
    Ok(e.re)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub delta_crit: f64,
    /// (δ, E(0, δ)) in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Bisection of δ ↦ E(0, δ) to bracket width 1e−3.
pub fn pushed_pulled_transition(family: &Family, bracket: (f64, f64), settings: &SpectrumSettings) -> Result<Transition, SpectrumError> {
    let (mut lo, mut hi) = bracket;
    let mut evaluations = Vec::new();
    let eval = |d: f64, ev: &mut Vec<(f64, f64)>| -> Result<f64, SpectrumError> {
        let e = resonance_at(family, d, settings)?;
        ev.push((d, e));
        Ok(e)
    };
    let e_lo = eval(lo, &mut evaluations)?;
    if (hi - lo).abs() == 0.0 {
        return if e_lo.abs() < RESONANCE_FLOOR { Ok(Transition { delta_crit: lo, evaluations }) } else { Err(SpectrumError::NoSignChange(lo, hi)) };
    }
    let e_hi = eval(hi, &mut evaluations)?;
    if e_lo.signum() == e_hi.signum() {
        return Err(SpectrumError::NoSignChange(lo, hi));
    }
    let mut s_lo = e_lo.signum();
    while (hi - lo).abs() > 1e-3 {
        let mid = 0.5 * (lo + hi);
        let e = eval(mid, &mut evaluations)?;
        if e == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if e.signum() == s_lo {
            lo = mid;
            s_lo = e.signum();
        } else {
            hi = mid;
        }
    }
    Ok(Transition { delta_crit: 0.5 * (lo + hi), evaluations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub branch: Branch,
    pub k: f64,
    pub re: f64,
    pub im: f64,
}

/// Fredholm borders Σ⁺ (weighted leading edge) and Σ⁻ (wake) sampled on `k_grid`.
pub fn essential_spectrum_curves(spec: &ModelSpec, pinch: &PinchResult, k_grid: &[f64]) -> Vec<CurvePoint> {
    let mut out = Vec::with_capacity(2 * k_grid.len());
    for &k in k_grid {
        let l = sigma_plus(spec, pinch, k);
        out.push(CurvePoint { branch: Branch::Plus, k, re: l.re, im: l.im });
    }
    for &k in k_grid {
        let l = sigma_minus(spec, pinch, k);
        out.push(CurvePoint { branch: Branch::Minus, k, re: l.re, im: l.im });
    }
    out
}

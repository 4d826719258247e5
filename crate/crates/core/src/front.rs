//! Critical traveling fronts `P(∂x)q + c* q' + f(q) = 0` and their weak tails.
//!
//! The boundary-value problem is solved for `v = ω q`, which stays O(x) in the
//! leading edge instead of decaying exponentially. Outside the grid `v` is
//! continued by the linear far-field modes: `u_minus + Σ c_j e^{ν_j (x − x_L)}`
//! on the left (unstable wake modes) and `a + b x + Σ s_k e^{μ_k (x − x_R)}` on
//! the right (Jordan pair plus the decaying modes of the shifted symbol).

use crate::dispersion::{dispersion_poly, PinchResult};
use crate::fd::{central_weights, operator_stencil};
use crate::interp::{cubic, UniformGrid};
use crate::linalg::{lstsq, BandMatrix};
use crate::model::{Family, ModelSpec};
use crate::weights::Weights;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrontError {
    #[error("Newton diverged from the tanh seed (residual {residual:.3e} after {iterations} iterations)")]
    NewtonDiverged { residual: f64, iterations: usize },
    #[error("tail coefficient b < 0; profile reported with b = -1")]
    WrongTailSign(Box<FrontProfile>),
    #[error("|b| = {0:.3e} before normalization: non-generic front")]
    DegenerateFit(f64),
    #[error("domain [{0}, {1}] too small or does not contain 0")]
    BadDomain(f64, f64),
    #[error("need at least {min} grid points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("wake linearization has {found} unstable modes, expected {expected}")]
    WakeModes { found: usize, expected: usize },
    #[error("far-field symbol has {found} strongly decaying modes, expected {expected}")]
    TailModes { found: usize, expected: usize },
    #[error("tail window [{0}, {1}] holds too few points")]
    BadWindow(f64, f64),
    #[error("linear solve failed: {0}")]
    Linear(String),
    #[error("at delta = {delta}: {source}")]
    AtParameter { delta: f64, source: Box<FrontError> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontProfile {
    /// Abscissae in the normalized frame (tail `(a + x) e^{−η* x}`).
    pub grid: UniformGrid,
    pub q: Vec<f64>,
    pub c: f64,
    pub eta_star: f64,
    pub u_minus: f64,
    pub a_coeff: f64,
    pub b_coeff: f64,
    /// Tail coefficients in the phase frame, before normalization.
    pub a_raw: f64,
    pub b_raw: f64,
    /// Normalized x = phase-frame x − `phase_shift`.
    pub phase_shift: f64,
    pub residual_norm: f64,
    pub eta_fit: f64,
    pub eta0_fit: Option<f64>,
    pub newton_iterations: usize,
}

impl FrontProfile {
    /// q* in the normalized frame, continued by u_minus and by the tail model.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.grid.x0 {
            self.u_minus
        } else if x > self.grid.x1 {
            (self.a_coeff + self.b_coeff * x) * (-self.eta_star * x).exp()
        } else {
            cubic(&self.grid, &self.q, x)
        }
    }

    /// q* in the frame of the phase condition.
    pub fn eval_phase(&self, x: f64) -> f64 {
        self.eval(x - self.phase_shift)
    }

    pub fn phase_grid(&self) -> UniformGrid {
        UniformGrid::new(self.grid.x0 + self.phase_shift, self.grid.x1 + self.phase_shift, self.grid.n)
    }

    pub fn xs(&self) -> Vec<f64> {
        self.grid.xs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontOptions {
    /// Value of q at x = 0; defaults to u_minus/2.
    pub phase_value: Option<f64>,
    /// Initial q on the same phase-frame grid (continuation seed).
    pub initial: Option<Vec<f64>>,
    pub max_iter: usize,
    /// Tail window in the phase frame; defaults to (0.5, 0.8)·x_right.
    pub window: Option<(f64, f64)>,
    /// Correct the discrete far-field symbol so that a + bx is an exact kernel.
    pub exact_tail: bool,
}

impl Default for FrontOptions {
    fn default() -> Self {
        Self { phase_value: None, initial: None, max_iter: 60, window: None, exact_tail: true }
    }
}

/// Real basis for a set of complex exponents closed under conjugation.
fn real_modes(roots: &[Complex64]) -> Vec<(Complex64, bool)> {
    let mut out = Vec::new();
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = roots[i];
        if z.im.abs() < 1e-10 * (1.0 + z.norm()) {
            out.push((Complex64::new(z.re, 0.0), false));
        } else {
            if let Some(j) = (0..roots.len()).find(|&j| !used[j] && (roots[j] - z.conj()).norm() < 1e-8 * (1.0 + z.norm())) {
                used[j] = true;
            }
            let zz = if z.im > 0.0 { z } else { z.conj() };
            out.push((zz, false));
            out.push((zz, true));
        }
    }
    out
}

fn mode_value(mode: &(Complex64, bool), dx: f64) -> f64 {
    let e = (mode.0 * dx).exp();
    if mode.1 {
        e.im
    } else {
        e.re
    }
}

/// Unstable wake exponents, i.e. roots of `P(ν) + cν + f'(u_minus)` with Re ν > 0.
pub fn wake_unstable_roots(spec: &ModelSpec, c: f64) -> Vec<Complex64> {
    let roots = dispersion_poly(spec, c, Complex64::new(0.0, 0.0), spec.df(spec.u_minus)).roots().unwrap_or_default();
    roots.into_iter().filter(|z| z.re > 0.0).collect()
}

struct Layout {
    m: usize,
    n: usize,
    n_right: usize,
    phase_row_after: usize,
}

impl Layout {
    fn n_unknowns(&self) -> usize {
        self.m + self.n + self.n_right
    }
    fn v(&self, i: usize) -> usize {
        self.m + i
    }
    fn right(&self, k: usize) -> usize {
        self.m + self.n + k
    }
    fn ode_row(&self, i: usize) -> usize {
        self.m + i + usize::from(i > self.phase_row_after)
    }
    fn phase_row(&self) -> usize {
        self.m + self.phase_row_after + 1
    }
    fn right_row(&self, r: usize) -> usize {
        self.m + self.n + 1 + r
    }
}

struct Problem<'a> {
    spec: &'a ModelSpec,
    grid: UniformGrid,
    hw: usize,
    stencil: Vec<f64>,
    /// log ω at nodes −hw .. n+hw (offset by hw)
    logw: Vec<f64>,
    left_modes: Vec<(Complex64, bool)>,
    right_modes: Vec<(Complex64, bool)>,
    layout: Layout,
    phase_weights: Vec<(usize, f64)>,
    phase_value: f64,
    logw_zero: f64,
    /// O(h⁴) far-field correction `χ₊ (β0 + β1 ∂x)` acting on v.
    tail_fix: (f64, f64),
    d1: Vec<f64>,
    chi: Vec<f64>,
}

impl Problem<'_> {
    fn x(&self, j: i64) -> f64 {
        self.grid.x0 + j as f64 * self.grid.h()
    }

    fn logw_at(&self, j: i64) -> f64 {
        self.logw[(j + self.hw as i64) as usize]
    }

    /// Value of v at any node index, ghosts included.
    fn node_value(&self, u: &[f64], j: i64) -> f64 {
        let n = self.layout.n as i64;
        let m = self.layout.m;
        if j < 0 {
            let dx = self.x(j) - self.grid.x0;
            self.spec.u_minus + (0..m).map(|k| u[k] * mode_value(&self.left_modes[k], dx)).sum::<f64>()
        } else if j >= n {
            let x = self.x(j);
            let dx = x - self.grid.x1;
            let base = self.layout.right(0);
            u[base] + u[base + 1] * x + (0..self.right_modes.len()).map(|k| u[base + 2 + k] * mode_value(&self.right_modes[k], dx)).sum::<f64>()
        } else {
            u[self.layout.v(j as usize)]
        }
    }

    /// (column, d value / d unknown) for node j.
    fn node_grad(&self, j: i64) -> Vec<(usize, f64)> {
        let n = self.layout.n as i64;
        let m = self.layout.m;
        if j < 0 {
            let dx = self.x(j) - self.grid.x0;
            (0..m).map(|k| (k, mode_value(&self.left_modes[k], dx))).collect()
        } else if j >= n {
            let x = self.x(j);
            let dx = x - self.grid.x1;
            let base = self.layout.right(0);
            let mut g = vec![(base, 1.0), (base + 1, x)];
            for k in 0..self.right_modes.len() {
                g.push((base + 2 + k, mode_value(&self.right_modes[k], dx)));
            }
            g
        } else {
            vec![(self.layout.v(j as usize), 1.0)]
        }
    }

    /// Size of the weighted residual that roundoff alone produces.
    fn rounding_floor(&self, u: &[f64]) -> f64 {
        let wsum: f64 = self.stencil.iter().map(|w| w.abs()).sum();
        (1e3 * f64::EPSILON * wsum * sup(u)).max(1e-8)
    }

    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let l = &self.layout;
        let mut r = vec![0.0; l.n_unknowns()];
        let hw = self.hw as i64;
        for i in 0..l.n {
            let ii = i as i64;
            let gi = self.logw_at(ii);
            let mut s = 0.0;
            for off in -hw..=hw {
                let w = self.stencil[(off + hw) as usize];
                if w == 0.0 {
                    continue;
                }
                s += w * (gi - self.logw_at(ii + off)).exp() * self.node_value(u, ii + off);
            }
            let v = u[l.v(i)];
            let q = v * (-gi).exp();
            s += gi.exp() * self.spec.f(q);
            if self.chi[i] > 0.0 {
                let d: f64 = (-2..=2i64).map(|o| self.d1[(o + 2) as usize] * self.node_value(u, ii + o)).sum();
                s += self.chi[i] * (self.tail_fix.0 * v + self.tail_fix.1 * d);
            }
            r[l.ode_row(i)] = s;
        }
        for k in 0..l.m {
            let dx = self.x(k as i64) - self.grid.x0;
            let ghost = self.spec.u_minus + (0..l.m).map(|j| u[j] * mode_value(&self.left_modes[j], dx)).sum::<f64>();
            r[k] = u[l.v(k)] - ghost;
        }
        for k in 0..l.m {
            let j = (l.n - l.m + k) as i64;
            let x = self.x(j);
            let dx = x - self.grid.x1;
            let base = l.right(0);
            let ghost = u[base] + u[base + 1] * x + (0..self.right_modes.len()).map(|s| u[base + 2 + s] * mode_value(&self.right_modes[s], dx)).sum::<f64>();
            r[l.right_row(k)] = u[l.v(j as usize)] - ghost;
        }
        let g0 = (-self.logw_zero).exp();
        r[l.phase_row()] = self.phase_weights.iter().map(|&(j, w)| w * u[l.v(j)]).sum::<f64>() * g0 - self.phase_value;
        r
    }


    fn jacobian(&self, u: &[f64]) -> BandMatrix<f64> {
        let l = &self.layout;
        let hw = self.hw as i64;
        let mut t: Vec<(usize, usize, f64)> = Vec::with_capacity(l.n * (2 * self.hw + 2));
        for i in 0..l.n {
            let row = l.ode_row(i);
            let ii = i as i64;
            let gi = self.logw_at(ii);
            for off in -hw..=hw {
                let w = self.stencil[(off + hw) as usize];
                if w == 0.0 {
                    continue;
                }
                let ratio = w * (gi - self.logw_at(ii + off)).exp();
                for (col, d) in self.node_grad(ii + off) {
                    t.push((row, col, ratio * d));
                }
            }
            let q = u[l.v(i)] * (-gi).exp();
            t.push((row, l.v(i), self.spec.df(q)));
            if self.chi[i] > 0.0 {
                t.push((row, l.v(i), self.chi[i] * self.tail_fix.0));
                for o in -2..=2i64 {
                    let w = self.chi[i] * self.tail_fix.1 * self.d1[(o + 2) as usize];
                    for (col, d) in self.node_grad(ii + o) {
                        t.push((row, col, w * d));
                    }
                }
            }
        }
        for k in 0..l.m {
            let dx = self.x(k as i64) - self.grid.x0;
            t.push((k, l.v(k), 1.0));
            for j in 0..l.m {
                t.push((k, j, -mode_value(&self.left_modes[j], dx)));
            }
        }
        for k in 0..l.m {
            let j = l.n - l.m + k;
            let row = l.right_row(k);
            t.push((row, l.v(j), 1.0));
            let x = self.x(j as i64);
            let dx = x - self.grid.x1;
            let base = l.right(0);
            t.push((row, base, -1.0));
            t.push((row, base + 1, -x));
            for s in 0..self.right_modes.len() {
                t.push((row, base + 2 + s, -mode_value(&self.right_modes[s], dx)));
            }
        }
        let g0 = (-self.logw_zero).exp();
        for &(j, w) in &self.phase_weights {
            t.push((l.phase_row(), l.v(j), w * g0));
        }
        BandMatrix::from_triplets(l.n_unknowns(), &t)
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Coefficients (β0, β1) such that the conjugated stencil plus `f'(0) + β0 + β1 D_h`
/// annihilates 1 and x exactly (`D_h` the centered first-difference stencil).
pub fn far_field_fix(stencil: &[f64], h: f64, eta: f64, fp0: f64) -> (f64, f64) {
    let hw = (stencil.len() / 2) as f64;
    let tilt: Vec<f64> = stencil.iter().enumerate().map(|(k, w)| w * (-eta * (k as f64 - hw) * h).exp()).collect();
    let s0: f64 = tilt.iter().sum::<f64>() + fp0;
    let s1: f64 = tilt.iter().enumerate().map(|(k, w)| w * (k as f64 - hw) * h).sum();
    (-s0, -s1)
}

/// Four-point cubic interpolation weights at `x` on a uniform grid.
fn interp_weights(grid: &UniformGrid, x: f64) -> Vec<(usize, f64)> {
    let s = (x - grid.x0) / grid.h();
    let i = (s.floor() as i64).clamp(1, grid.n as i64 - 3) as usize;
    let t = s - i as f64;
    vec![
        (i - 1, -t * (t - 1.0) * (t - 2.0) / 6.0),
        (i, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0),
        (i + 1, -(t + 1.0) * t * (t - 2.0) / 2.0),
        (i + 2, (t + 1.0) * t * (t - 1.0) / 6.0),
    ]
}

pub fn solve_front(spec: &ModelSpec, pinch: &PinchResult, domain: (f64, f64), n: usize) -> Result<FrontProfile, FrontError> {
    solve_front_with(spec, pinch, domain, n, &FrontOptions::default())
}

pub fn solve_front_with(spec: &ModelSpec, pinch: &PinchResult, domain: (f64, f64), n: usize, opts: &FrontOptions) -> Result<FrontProfile, FrontError> {
    let (xl, xr) = domain;
    if n < 1000 {
        return Err(FrontError::TooFewPoints { min: 1000, got: n });
    }
    let eta = pinch.eta_star;
    let c = pinch.c_star;
    let m = spec.order_half;
    let wake = wake_unstable_roots(spec, c);
    if wake.len() != m {
        return Err(FrontError::WakeModes { found: wake.len(), expected: m });
    }
    let nu_wake = wake.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if !(xl < -1.0 && xr > 1.0) || xl > -15.0 / nu_wake || xr < 15.0 / eta {
        return Err(FrontError::BadDomain(xl, xr));
    }
    if xl > -30.0 / nu_wake || xr < 30.0 / eta {
        tracing::warn!(xl, xr, nu_wake, eta, "front domain shorter than [-30/nu_wake, 30/eta*]");
    }
    let tail_roots: Vec<Complex64> = dispersion_poly(spec, c, Complex64::new(0.0, 0.0), spec.df(0.0))
        .roots()
        .unwrap_or_default()
        .into_iter()
        .filter(|z| z.re < -eta - 1e-6)
        .map(|z| z + eta)
        .collect();
    if tail_roots.len() != m - 1 {
        return Err(FrontError::TailModes { found: tail_roots.len(), expected: m - 1 });
    }

    let grid = UniformGrid::new(xl, xr, n);
    let h = grid.h();
    let mut coeffs: Vec<f64> = (0..=spec.degree()).map(|k| spec.p_coeff(k)).collect();
    coeffs[1] += c;
    let (hw, stencil) = operator_stencil(&coeffs, h);
    let weights = Weights::new(eta, m);
    let logw: Vec<f64> = (-(hw as i64)..(n + hw) as i64).map(|j| weights.log_omega(xl + j as f64 * h)).collect();
    // The discrete far-field symbol of the v-equation has its double root
    // O(h⁴) away from 0, which bends the linear tail a + bx over long
    // domains. Shift it back with a consistent O(h⁴) correction.
    let tail_fix = if opts.exact_tail { far_field_fix(&stencil, h, eta, spec.df(0.0)) } else { (0.0, 0.0) };
    let phase_value = opts.phase_value.unwrap_or(0.5 * spec.u_minus);
    let phase_weights = interp_weights(&grid, 0.0);
    let layout = Layout { m, n, n_right: 2 + (m - 1), phase_row_after: grid.nearest(0.0) };
    let prob = Problem {
        spec,
        grid,
        hw,
        stencil,
        logw,
        left_modes: real_modes(&wake),
        right_modes: real_modes(&tail_roots),
        layout,
        phase_weights,
        phase_value,
        logw_zero: weights.log_omega(0.0),
        tail_fix,
        d1: central_weights(1, h),
        chi: grid.xs().iter().map(|&x| weights.chi_plus(x)).collect(),
    };

    // seed
    let l = &prob.layout;
    let mut u = vec![0.0; l.n_unknowns()];
    let q0: Vec<f64> = match &opts.initial {
        Some(q) if q.len() == n => q.clone(),
        _ => {
            let ratio = (1.0 - 2.0 * phase_value / spec.u_minus).clamp(-0.999, 0.999);
            let x0 = -2.0 * ratio.atanh() / eta;
            grid.xs().iter().map(|&x| spec.u_minus * (1.0 - (eta * (x - x0) / 2.0).tanh()) / 2.0).collect()
        }
    };
    for i in 0..n {
        u[l.v(i)] = q0[i] * prob.logw_at(i as i64).exp();
    }
    // tail coefficients from the seed's last points
    let j1 = n - 1;
    let j0 = n - 1 - (n / 20).max(2);
    let (v0, v1) = (u[l.v(j0)], u[l.v(j1)]);
    let (x0, x1) = (grid.x(j0), grid.x(j1));
    let b = (v1 - v0) / (x1 - x0);
    u[l.right(0)] = v1 - b * x1;
    u[l.right(1)] = b;

    let mut res = prob.residual(&u);
    let mut norm = sup(&res);
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let jac = prob.jacobian(&u);
        let lu = jac.lu().map_err(|e| FrontError::Linear(e.to_string()))?;
        let mut step: Vec<f64> = res.iter().map(|v| -v).collect();
        lu.solve_in_place(&mut step);
        let step_norm = sup(&step);
        let unorm = sup(&u);
        let mut lam = 1.0;
        let mut accepted = false;
        while lam >= 1.0 / 4096.0 {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, d)| a + lam * d).collect();
            let r_trial = prob.residual(&trial);
            let nt = sup(&r_trial);
            if nt.is_finite() && nt <= (1.0 - 1e-4 * lam) * norm {
                u = trial;
                res = r_trial;
                norm = nt;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if lam == 1.0 && step_norm <= 1e-12 * unorm.max(1.0) {
            converged = true;
            break;
        }
        if !accepted {
            // at the rounding floor the residual can no longer decrease
            converged = norm < prob.rounding_floor(&u);
            break;
        }
    }
    if !converged && norm > prob.rounding_floor(&u) {
        return Err(FrontError::NewtonDiverged { residual: norm, iterations });
    }

    let q: Vec<f64> = (0..n).map(|i| u[l.v(i)] * (-prob.logw_at(i as i64)).exp()).collect();
    let residual_norm = (prob.hw..n - prob.hw)
        .map(|i| (res[l.ode_row(i)] * (-prob.logw_at(i as i64)).exp()).abs())
        .fold(0.0, f64::max);
    let window = opts.window.unwrap_or((0.5 * xr, 0.8 * xr));
    let tail = extract_asymptotics(&grid, &q, eta, window)?;
    let eta0_fit = fit_eta0(&grid, &q, eta, tail.a_raw, tail.b_raw, window);
    let profile = FrontProfile {
        grid: UniformGrid::new(xl - tail.shift, xr - tail.shift, n),
        q,
        c,
        eta_star: eta,
        u_minus: spec.u_minus,
        a_coeff: tail.a,
        b_coeff: tail.b,
        a_raw: tail.a_raw,
        b_raw: tail.b_raw,
        phase_shift: tail.shift,
        residual_norm,
        eta_fit: tail.eta_fit,
        eta0_fit,
        newton_iterations: iterations,
    };
    if tail.b_raw < 0.0 {
        return Err(FrontError::WrongTailSign(Box::new(profile)));
    }
    Ok(profile)
}

/// Accept a profile reported with a negative tail coefficient.
pub fn allow_wrong_tail_sign(r: Result<FrontProfile, FrontError>) -> Result<FrontProfile, FrontError> {
    match r {
        Err(FrontError::WrongTailSign(p)) => Ok(*p),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub a_raw: f64,
    pub b_raw: f64,
    pub a: f64,
    pub b: f64,
    pub shift: f64,
    pub eta_fit: f64,
}

/// Least squares of `e^{η x} q` against (1, x) on the window, a three-parameter
/// fit for the decay rate, and the normalizing translation.
pub fn extract_asymptotics(grid: &UniformGrid, q: &[f64], eta_star: f64, window: (f64, f64)) -> Result<TailFit, FrontError> {
    let idx: Vec<usize> = (0..grid.n).filter(|&i| grid.x(i) >= window.0 && grid.x(i) <= window.1).collect();
    if idx.len() < 8 {
        return Err(FrontError::BadWindow(window.0, window.1));
    }
    let xs: Vec<f64> = idx.iter().map(|&i| grid.x(i)).collect();
    let w: Vec<f64> = idx.iter().map(|&i| (eta_star * grid.x(i)).exp() * q[i]).collect();
    let (ab, _) = lstsq(&[vec![1.0; xs.len()], xs.clone()], &w).ok_or_else(|| FrontError::Linear("tail fit".into()))?;
    let (a_raw, b_raw) = (ab[0], ab[1]);
    if b_raw.abs() < 1e-6 {
        return Err(FrontError::DegenerateFit(b_raw));
    }
    // Gauss–Newton for w ≈ (A + B x) e^{−(E − η*) x}
    let (mut pa, mut pb, mut pe) = (a_raw, b_raw, eta_star);
    for _ in 0..30 {
        let mut cols = [(); 3].map(|_| Vec::with_capacity(xs.len()));
        let mut r = Vec::with_capacity(xs.len());
        for (&x, &wi) in xs.iter().zip(&w) {
            let e = (-(pe - eta_star) * x).exp();
            let lin = pa + pb * x;
            r.push(wi - lin * e);
            cols[0].push(e);
            cols[1].push(x * e);
            cols[2].push(-x * lin * e);
        }
        let Some((d, _)) = lstsq(&cols, &r) else { break };
        pa += d[0];
        pb += d[1];
        pe += d[2];
        if d[2].abs() < 1e-15 {
            break;
        }
    }
    let shift = b_raw.abs().ln() / eta_star;
    let a = (a_raw + b_raw * shift) / b_raw.abs();
    Ok(TailFit { a_raw, b_raw, a, b: b_raw.signum(), shift, eta_fit: pe })
}

/// Rate of the correction `e^{η x} q − (a + b x)` on the stretch before the tail
/// window, fitted as `C x^k e^{−η₀ x}`.
fn fit_eta0(grid: &UniformGrid, q: &[f64], eta: f64, a: f64, b: f64, window: (f64, f64)) -> Option<f64> {
    let (lo, hi) = (2.0, window.0);
    let mut cols = vec![Vec::new(), Vec::new(), Vec::new()];
    let mut ys = Vec::new();
    for i in 0..grid.n {
        let x = grid.x(i);
        if x < lo || x > hi {
            continue;
        }
        let v = (eta * x).exp() * q[i];
        let d = (v - (a + b * x)).abs();
        if d > 1e-9 * v.abs().max(1.0) {
            cols[0].push(1.0);
            cols[1].push(x.ln());
            cols[2].push(x);
            ys.push(d.ln());
        }
    }
    if ys.len() < 10 {
        return None;
    }
    let (p, _) = lstsq(&cols, &ys)?;
    (p[2] < 0.0).then_some(-p[2])
}

/// Unweighted residual `P(∂x)q + c q' + f(q)` on the interior nodes (index, value).
pub fn traveling_wave_residual(spec: &ModelSpec, c: f64, grid: &UniformGrid, q: &[f64]) -> Vec<(usize, f64)> {
    let mut coeffs: Vec<f64> = (0..=spec.degree()).map(|k| spec.p_coeff(k)).collect();
    coeffs[1] += c;
    let (hw, w) = operator_stencil(&coeffs, grid.h());
    (hw..grid.n - hw)
        .map(|i| {
            let s: f64 = w.iter().enumerate().map(|(k, wk)| wk * q[i + k - hw]).sum();
            (i, s + spec.f(q[i]))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationRow {
    pub delta: f64,
    pub a: f64,
    pub b_raw: f64,
    pub residual: f64,
}

/// Solve along a δ grid, seeding each BVP from the previous profile.
pub fn front_continuation(
    family: &Family,
    delta_grid: &[f64],
    pinch_table: &[PinchResult],
    domain: (f64, f64),
    n: usize,
) -> Result<Vec<(ContinuationRow, FrontProfile)>, FrontError> {
    let mut out: Vec<(ContinuationRow, FrontProfile)> = Vec::new();
    for (k, (&delta, pinch)) in delta_grid.iter().zip(pinch_table).enumerate() {
        let spec = family.at(delta);
        let mut opts = FrontOptions::default();
        if k > 0 {
            opts.initial = Some(out[k - 1].1.q.clone());
        }
        let wrap = |e| FrontError::AtParameter { delta, source: Box::new(e) };
        let p = match allow_wrong_tail_sign(solve_front_with(&spec, pinch, domain, n, &opts)) {
            Ok(p) => p,
            Err(e) if k > 0 => allow_wrong_tail_sign(solve_front(&spec, pinch, domain, n)).map_err(|_| wrap(e))?,
            Err(e) => return Err(wrap(e)),
        };
        out.push((ContinuationRow { delta, a: p.a_coeff, b_raw: p.b_raw, residual: p.residual_norm }, p));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::find_pinched_double_root;

    #[test]
    fn rest_states_have_zero_residual() {
        let spec = ModelSpec::cubic(0.2);
        let g = UniformGrid::new(-10.0, 10.0, 201);
        for level in [0.0, spec.u_minus] {
            let r = traveling_wave_residual(&spec, 0.8, &g, &vec![level; 201]);
            assert!(r.iter().all(|(_, v)| v.abs() < 1e-12), "level {level}");
        }
    }

    #[test]
    fn synthetic_tails() {
        let g = UniformGrid::new(0.0, 30.0, 3001);
        let q: Vec<f64> = g.xs().iter().map(|&x| (3.0 + 2.0 * x) * (-x).exp()).collect();
        let t = extract_asymptotics(&g, &q, 1.0, (10.0, 20.0)).unwrap();
        assert!((t.a_raw - 3.0).abs() < 1e-10 && (t.b_raw - 2.0).abs() < 1e-10);
        assert!((t.eta_fit - 1.0).abs() < 1e-10);
        assert_eq!(t.b, 1.0);
        // shifted profile has unit slope
        assert!((t.a - (1.5 + 2f64.ln())).abs() < 1e-10);
        let q: Vec<f64> = g.xs().iter().map(|&x| x * (-x).exp()).collect();
        let t = extract_asymptotics(&g, &q, 1.0, (10.0, 20.0)).unwrap();
        assert!(t.a_raw.abs() < 1e-10 && (t.b_raw - 1.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_tail_detected() {
        let g = UniformGrid::new(0.0, 30.0, 301);
        let q: Vec<f64> = g.xs().iter().map(|&x| 2.0 * (-x).exp()).collect();
        assert!(matches!(extract_asymptotics(&g, &q, 1.0, (10.0, 20.0)), Err(FrontError::DegenerateFit(_))));
    }

    #[test]
    fn fkpp_front_small() {
        let spec = ModelSpec::fkpp();
        let pinch = find_pinched_double_root(&spec).unwrap();
        let p = solve_front(&spec, &pinch, (-40.0, 60.0), 2001).unwrap();
        assert!(p.residual_norm < 1e-8, "{}", p.residual_norm);
        assert!((p.eta_fit - 1.0).abs() < 1e-3);
        assert_eq!(p.b_coeff, 1.0);
        assert!((p.eval_phase(0.0) - 0.5).abs() < 1e-12);
        assert!((p.q[0] - 1.0).abs() < 1e-6);
        let xr = p.grid.x1;
        assert!((p.q[p.grid.n - 1] - (p.a_coeff + xr) * (-xr).exp()).abs() < 1e-6);
    }

    fn pinch(spec: &ModelSpec) -> PinchResult {
        find_pinched_double_root(spec).unwrap()
    }

    #[test]
    fn fkpp_reference_resolution() {
        let spec = ModelSpec::fkpp();
        let p = solve_front(&spec, &pinch(&spec), (-40.0, 60.0), 4000).unwrap();
        assert!(p.residual_norm < 1e-8);
        assert!((p.eta_fit - 1.0).abs() < 1e-3);
        // quadratic nonlinearity feeds x² e^{−2x}: correction rate 1
        assert!((p.eta0_fit.unwrap() - 1.0).abs() < 0.1, "{:?}", p.eta0_fit);
    }

    #[test]
    fn self_convergence_is_fourth_order() {
        let spec = ModelSpec::fkpp();
        let pi = pinch(&spec);
        let ps: Vec<_> = [1001, 2001, 4001].iter().map(|&n| solve_front(&spec, &pi, (-40.0, 60.0), n).unwrap()).collect();
        let diff = |a: &FrontProfile, b: &FrontProfile| (0..a.grid.n).map(|i| (a.q[i] - b.q[2 * i]).abs()).fold(0.0, f64::max);
        let order = (diff(&ps[0], &ps[1]) / diff(&ps[1], &ps[2])).log2();
        assert!(order >= 3.0, "order {order}");
    }

    #[test]
    fn translation_covariance() {
        let spec = ModelSpec::fkpp();
        let pi = pinch(&spec);
        let p2 = solve_front(&spec, &pi, (-40.0, 60.0), 4000).unwrap();
        let opts = FrontOptions { phase_value: Some(1.0 / 3.0), ..Default::default() };
        let p3 = solve_front_with(&spec, &pi, (-40.0, 60.0), 4000, &opts).unwrap();
        let lo = p2.grid.x0.max(p3.grid.x0) + 1.0;
        let hi = p2.grid.x1.min(p3.grid.x1) - 1.0;
        let g = UniformGrid::new(lo, hi, 5001);
        let d = g.xs().iter().map(|&x| (p2.eval(x) - p3.eval(x)).abs()).fold(0.0, f64::max);
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn tail_model_consistency() {
        let spec = ModelSpec::fkpp();
        let p = solve_front(&spec, &pinch(&spec), (-40.0, 60.0), 4000).unwrap();
        let eta0 = p.eta0_fit.unwrap();
        let x2 = 0.8 * 60.0 - p.phase_shift;
        // fit C at x2, then check the bound to the right; the weighted roundoff floor is 1e-7
        let w = |x: f64| (p.eval(x) - (p.a_coeff + x) * (-x).exp()).abs() * x.exp();
        let c = w(x2) * (eta0 * x2).exp();
        for i in 0..p.grid.n {
            let x = p.grid.x(i);
            if x >= x2 {
                assert!(w(x) <= c * (-eta0 * x).exp() + 1e-7, "x = {x}");
            }
        }
    }

    #[test]
    fn cubic_tail_sign_flips_across_one_third() {
        for (delta, negative) in [(0.2, true), (0.4, false)] {
            let spec = ModelSpec::cubic(delta);
            let r = solve_front(&spec, &pinch(&spec), (-60.0, 100.0), 4000);
            match r {
                Err(FrontError::WrongTailSign(p)) => {
                    assert!(negative);
                    assert_eq!(p.b_coeff, -1.0);
                    assert!(p.residual_norm < 1e-8);
                }
                Ok(p) => {
                    assert!(!negative);
                    assert_eq!(p.b_coeff, 1.0);
                }
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn efkpp_continuation() {
        let grid = [0.02, 0.05];
        let fam = Family::Efkpp;
        let table: Vec<_> = grid.iter().map(|&d| pinch(&fam.at(d))).collect();
        let rows = front_continuation(&fam, &grid, &table, (-40.0, 60.0), 4000).unwrap();
        for (r, _) in &rows {
            assert!(r.residual < 1e-7, "{r:?}");
        }
        let single = front_continuation(&fam, &grid[..1], &table[..1], (-40.0, 60.0), 4000).unwrap();
        let direct = solve_front(&fam.at(0.02), &table[0], (-40.0, 60.0), 4000).unwrap();
        assert_eq!(single[0].1, direct);
    }

    #[test]
    fn constant_family_gives_constant_a() {
        let fam = Family::Constant { spec: ModelSpec::fkpp() };
        let grid = [0.0, 0.5, 1.0];
        let table: Vec<_> = grid.iter().map(|&d| pinch(&fam.at(d))).collect();
        let rows = front_continuation(&fam, &grid, &table, (-40.0, 60.0), 2000).unwrap();
        for (r, _) in &rows[1..] {
            assert!((r.a - rows[0].0.a).abs() < 1e-8);
        }
    }

    #[test]
    fn bad_domain_and_grid() {
        let spec = ModelSpec::fkpp();
        let pinch = find_pinched_double_root(&spec).unwrap();
        assert!(matches!(solve_front(&spec, &pinch, (-5.0, 60.0), 2000), Err(FrontError::BadDomain(..))));
        assert!(matches!(solve_front(&spec, &pinch, (-40.0, 60.0), 100), Err(FrontError::TooFewPoints { .. })));
    }
}

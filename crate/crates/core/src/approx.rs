//! Matched approximate solution: a shifted critical front in the interior glued
//! to a self-similar Gaussian leading edge at `x = (t+T)^μ`, and the residual of
//! the weighted equation in the frame with logarithmic delay.

use crate::dispersion::PinchResult;
use crate::fd::{central_weights, fornberg, half_width};
use crate::front::FrontProfile;
use crate::interp::{hermite5, UniformGrid};
use crate::linalg::BandMatrix;
use crate::model::ModelSpec;
use crate::weights::{Smoothstep, Weights};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ApproxError {
    #[error("discrete (L_Δ + 1/2) is singular")]
    SingularSystem,
    #[error("matching shift does not contract at t = {t} (T = {t_shift}); increase T")]
    NoContraction { t: f64, t_shift: f64 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

pub const T_MIN: f64 = 10.0;

/// Ψ0 = β0 ξ e^{−ξ²/4} and the first-order correction Ψ1 on [0, ξ_max].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarProfiles {
    pub xi_grid: UniformGrid,
    pub psi0: Vec<f64>,
    pub psi1: Vec<f64>,
    pub beta0: f64,
    /// `derivs[k-1]` holds ∂ξ^k Ψ1 for k = 1, 2, 3.
    pub derivs: [Vec<f64>; 3],
    /// Coefficients of the forcing `c1 Ψ0′ − c3 Ψ0‴`.
    pub forcing: (f64, f64),
}

fn psi0_derivs(beta0: f64, xi: f64) -> [f64; 4] {
    let g = (-xi * xi / 4.0).exp();
    let x2 = xi * xi;
    [
        beta0 * xi * g,
        beta0 * (1.0 - x2 / 2.0) * g,
        beta0 * (-1.5 * xi + xi * x2 / 4.0) * g,
        beta0 * (-1.5 + 1.5 * x2 - x2 * x2 / 8.0) * g,
    ]
}

/// Windowed derivatives up to order 3 (7-point, one-sided near the ends).
fn derivative_tables(grid: &UniformGrid, y: &[f64]) -> [Vec<f64>; 3] {
    let n = grid.n;
    let w = 7.min(n);
    let h = grid.h();
    let offsets: Vec<f64> = (0..w).map(|j| j as f64).collect();
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let start = i.saturating_sub(w / 2).min(n - w);
        let c = fornberg((i - start) as f64, &offsets, 3);
        for k in 1..=3 {
            out[k - 1][i] = (0..w).map(|j| c[k][j] * y[start + j]).sum::<f64>() / h.powi(k as i32);
        }
    }
    out
}

/// Solve `(L_Δ + ½) Ψ1 = c1 Ψ0′ − c3 Ψ0‴` with Ψ1(0) = Ψ1(ξ_max) = 0.
pub fn solve_psi1_forced(c1: f64, c3: f64, beta0: f64, xi_max: f64, n: usize) -> Result<SelfSimilarProfiles, ApproxError> {
    if n < 16 || !(xi_max > 0.0) {
        return Err(ApproxError::BadParameter(format!("need n >= 16 and xi_max > 0, got n = {n}, xi_max = {xi_max}")));
    }
    let grid = UniformGrid::new(0.0, xi_max, n);
    let h = grid.h();
    let xs = grid.xs();
    let m = n - 2;
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; m];
    for i in 1..n - 1 {
        let xi = xs[i];
        let (start, len) = if i < 2 {
            (0, 6)
        } else if i + 2 >= n {
            (n - 6, 6)
        } else {
            (i - 2, 5)
        };
        let offs: Vec<f64> = (0..len).map(|j| (start + j) as f64 - i as f64).collect();
        let c = fornberg(0.0, &offs, 2);
        for j in 0..len {
            let col = start + j;
            if col == 0 || col == n - 1 {
                continue;
            }
            let mut v = c[2][j] / (h * h) + 0.5 * xi * c[1][j] / h;
            if col == i {
                v += 1.5;
            }
            trip.push((i - 1, col - 1, v));
        }
        let d = psi0_derivs(beta0, xi);
        rhs[i - 1] = c1 * d[1] - c3 * d[3];
    }
    let a = BandMatrix::from_triplets(m, &trip);
    let lu = a.lu().map_err(|_| ApproxError::SingularSystem)?;
    let sol = lu.solve(&rhs);
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(ApproxError::SingularSystem);
    }
    let mut psi1 = vec![0.0; n];
    psi1[1..n - 1].copy_from_slice(&sol);
    let psi0 = xs.iter().map(|&x| psi0_derivs(beta0, x)[0]).collect();
    let derivs = derivative_tables(&grid, &psi1);
    Ok(SelfSimilarProfiles { xi_grid: grid, psi0, psi1, beta0, derivs, forcing: (c1, c3) })
}

/// Leading-edge correction with forcing `(3/(2η*√α)) Ψ0′ − (α3/α^{3/2}) Ψ0‴`.
/// An infinite `eta_star` drops the drift term.
pub fn solve_psi1(alpha: f64, alpha3: f64, eta_star: f64, beta0: f64, xi_max: f64, n: usize) -> Result<SelfSimilarProfiles, ApproxError> {
    if !(alpha > 0.0) {
        return Err(ApproxError::BadParameter(format!("alpha = {alpha} must be positive")));
    }
    let c1 = 3.0 / (2.0 * eta_star * alpha.sqrt());
    let c3 = alpha3 / alpha.powf(1.5);
    solve_psi1_forced(c1, c3, beta0, xi_max, n)
}

impl SelfSimilarProfiles {
    /// `(Ψ1, Ψ1′, Ψ1″)`; zero past ξ_max, cubic Taylor continuation for ξ < 0.
    pub fn eval_psi1(&self, xi: f64) -> (f64, f64, f64) {
        let g = &self.xi_grid;
        if xi > g.x1 {
            return (0.0, 0.0, 0.0);
        }
        if xi < 0.0 {
            let (d1, d2, d3) = (self.derivs[0][0], self.derivs[1][0], self.derivs[2][0]);
            return (d1 * xi + d2 * xi * xi / 2.0 + d3 * xi.powi(3) / 6.0, d1 + d2 * xi + d3 * xi * xi / 2.0, d2 + d3 * xi);
        }
        hermite5(g, &self.psi1, &self.derivs[0], &self.derivs[1], xi)
    }

    /// Max of `|(L_Δ + ½)Ψ1 − forcing|` using the derivative tables.
    pub fn ode_residual(&self) -> f64 {
        let (c1, c3) = self.forcing;
        let xs = self.xi_grid.xs();
        (1..xs.len() - 1)
            .map(|i| {
                let d = psi0_derivs(self.beta0, xs[i]);
                let lhs = self.derivs[1][i] + 0.5 * xs[i] * self.derivs[0][i] + 1.5 * self.psi1[i];
                (lhs - (c1 * d[1] - c3 * d[3])).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Smallest C with |Ψ1(ξ)| ≤ C e^{−ξ²/8} on the grid.
    pub fn gaussian_constant(&self) -> f64 {
        self.xi_grid.xs().iter().zip(&self.psi1).map(|(x, v)| v.abs() * (x * x / 8.0).exp()).fold(0.0, f64::max)
    }
}

/// Interior profile `v* = ω q*` whose shifts form ψ⁻.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Interior {
    /// Computed front, tabulated as ω q* with C² Hermite interpolation.
    Front { profile: Box<FrontProfile>, v: Vec<f64>, d1: Vec<f64>, d2: Vec<f64> },
    /// `q*(x) = (a + x) e^{−η* x}` for all x.
    ExactTail { a: f64 },
}

impl Interior {
    pub fn from_front(profile: &FrontProfile, weights: &Weights) -> Self {
        let g = profile.grid;
        let v: Vec<f64> = g.xs().iter().zip(&profile.q).map(|(&x, q)| weights.omega(x) * q).collect();
        let [d1, d2, _] = derivative_tables(&g, &v);
        Interior::Front { profile: Box::new(profile.clone()), v, d1, d2 }
    }

    /// Tail offset `a` of q* ~ (a + x) e^{−η* x}.
    pub fn tail_a(&self) -> f64 {
        match self {
            Interior::Front { profile, .. } => profile.a_coeff,
            Interior::ExactTail { a } => *a,
        }
    }

    /// `(v*, v*′)` at `y`.
    pub fn eval(&self, weights: &Weights, y: f64) -> (f64, f64) {
        let eta = weights.eta_star;
        let tail = |a: f64, b: f64| {
            let e = (eta * (weights.h(y) - y)).exp();
            let hp = weights.chi_plus(y);
            (e * (a + b * y), e * (b + (a + b * y) * eta * (hp - 1.0)))
        };
        match self {
            Interior::ExactTail { a } => tail(*a, 1.0),
            Interior::Front { profile, v, d1, d2 } => {
                let g = &profile.grid;
                if y > g.x1 {
                    tail(profile.a_coeff, profile.b_coeff)
                } else if y < g.x0 {
                    let w = weights.omega(y);
                    let hp = weights.chi_plus(y);
                    (profile.u_minus * w, profile.u_minus * w * eta * hp)
                } else {
                    let (f, df, _) = hermite5(g, v, d1, d2, y);
                    (f, df)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxSettings {
    pub t_shift: f64,
    pub mu: f64,
    pub xi_max: f64,
    pub n_xi: usize,
    /// Defaults to the tail offset `a` of the interior profile.
    pub x0: Option<f64>,
    /// Defaults to √α.
    pub beta0: Option<f64>,
}

impl Default for ApproxSettings {
    fn default() -> Self {
        Self { t_shift: 100.0, mu: 0.1, xi_max: 12.0, n_xi: 4000, x0: None, beta0: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxSolution {
    /// The time offset T.
    pub t_shift: f64,
    pub mu: f64,
    pub r: f64,
    pub x0: f64,
    pub profiles: SelfSimilarProfiles,
    /// `(t, ζ(t+T))` on log-spaced t.
    pub zeta_table: Vec<(f64, f64)>,
    pub interior: Interior,
    pub weights: Weights,
    pub alpha: f64,
    pub alpha3: f64,
    pub eta_star: f64,
    pub c_star: f64,
    /// Coefficient κ of the delay term `κ/(t+T)` in the frame speed; 3/(2η*) by default.
    pub log_coefficient: f64,
    pub spec: ModelSpec,
}

/// ψ and its pieces at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiSample {
    pub x: f64,
    pub psi: f64,
    pub psi_minus: f64,
    pub psi_plus: f64,
    pub chi: f64,
}

fn blend(s: f64) -> f64 {
    1.0 - Smoothstep::quintic().eval(s)
}

pub fn build_approx(spec: &ModelSpec, pinch: &PinchResult, interior: Interior, settings: &ApproxSettings) -> Result<ApproxSolution, ApproxError> {
    let ApproxSettings { t_shift, mu, xi_max, n_xi, .. } = *settings;
    if !(mu > 0.0 && mu < 0.125) {
        return Err(ApproxError::BadParameter(format!("mu = {mu} must lie in (0, 1/8)")));
    }
    if !(t_shift >= T_MIN) {
        return Err(ApproxError::BadParameter(format!("T = {t_shift} below T_min = {T_MIN}")));
    }
    let s = pinch.shifted_symbol(spec);
    let alpha = pinch.alpha;
    let alpha3 = s.get(3).copied().unwrap_or(0.0);
    let beta0 = settings.beta0.unwrap_or(alpha.sqrt());
    let profiles = solve_psi1(alpha, alpha3, pinch.eta_star, beta0, xi_max, n_xi)?;
    let weights = Weights::new(pinch.eta_star, spec.order_half);
    let x0 = settings.x0.unwrap_or_else(|| interior.tail_a());
    Ok(ApproxSolution {
        t_shift,
        mu,
        r: 2.0 + mu,
        x0,
        profiles,
        zeta_table: Vec::new(),
        interior,
        weights,
        alpha,
        alpha3,
        eta_star: pinch.eta_star,
        c_star: pinch.c_star,
        log_coefficient: 1.5 / pinch.eta_star,
        spec: spec.clone(),
    })
}

impl ApproxSolution {
    pub fn matching_point(&self, t: f64) -> f64 {
        (t + self.t_shift).powf(self.mu)
    }

    /// `(ψ⁻, ∂x ψ⁻)` for a given shift ζ.
    pub fn psi_minus(&self, x: f64, zeta: f64) -> (f64, f64) {
        self.interior.eval(&self.weights, x + zeta)
    }

    /// `(ψ⁺, ∂x ψ⁺)`.
    pub fn psi_plus(&self, x: f64, t: f64) -> (f64, f64) {
        let s = t + self.t_shift;
        let y = x + self.x0;
        let g = (-y * y / (4.0 * self.alpha * s)).exp();
        let k = self.profiles.beta0 / self.alpha.sqrt();
        let scale = 1.0 / (self.alpha * s).sqrt();
        let (p1, dp1, _) = self.profiles.eval_psi1(y * scale);
        (k * y * g + p1, k * g * (1.0 - y * y / (2.0 * self.alpha * s)) + dp1 * scale)
    }

    /// Matching shift ζ(t+T) by the slope-normalized fixed point.
    pub fn compute_zeta(&self, t: f64) -> Result<f64, ApproxError> {
        if !(t + self.t_shift > 0.0) {
            return Err(ApproxError::BadParameter(format!("t = {t}")));
        }
        let xm = self.matching_point(t);
        let target = self.psi_plus(xm, t).0;
        let mut zeta = 0.0;
        let mut last = f64::INFINITY;
        let mut growth = 0;
        for _ in 0..30 {
            let (v, dv) = self.psi_minus(xm, zeta);
            let slope = if dv.abs() > 0.1 { dv } else { 1.0 };
            let upd = (target - v) / slope;
            zeta += upd;
            if upd.abs() < 1e-12 * (1.0 + zeta.abs()) {
                return Ok(zeta);
            }
            if upd.abs() > last {
                growth += 1;
                if growth >= 2 {
                    return Err(ApproxError::NoContraction { t, t_shift: self.t_shift });
                }
            } else {
                growth = 0;
            }
            last = upd.abs();
        }
        Err(ApproxError::NoContraction { t, t_shift: self.t_shift })
    }

    /// Fill `zeta_table` on `n` log-spaced samples of t + T over [T, T + t_max].
    pub fn tabulate_zeta(&mut self, t_max: f64, n: usize) -> Result<(), ApproxError> {
        let (l0, l1) = (self.t_shift.ln(), (self.t_shift + t_max.max(0.0)).ln());
        let mut table = Vec::with_capacity(n);
        for i in 0..n.max(2) {
            let s = (l0 + (l1 - l0) * i as f64 / (n.max(2) - 1) as f64).exp();
            let t = (s - self.t_shift).max(0.0);
            table.push((t, self.compute_zeta(t)?));
        }
        self.zeta_table = table;
        Ok(())
    }

    /// ζ from the table (cubic in log(t+T)), or directly when outside it.
    pub fn zeta(&self, t: f64) -> Result<f64, ApproxError> {
        let tab = &self.zeta_table;
        if tab.len() < 4 || t < tab[0].0 || t > tab[tab.len() - 1].0 {
            return self.compute_zeta(t);
        }
        let ls: Vec<f64> = tab.iter().map(|p| (p.0 + self.t_shift).ln()).collect();
        let l = (t + self.t_shift).ln();
        let i = ls.partition_point(|&v| v <= l).clamp(2, ls.len() - 2) - 2;
        let nodes = &ls[i..i + 4];
        let w = fornberg(l, nodes, 0);
        Ok((0..4).map(|j| w[0][j] * tab[i + j].1).sum())
    }

    pub fn sample(&self, x: f64, t: f64, zeta: f64) -> PsiSample {
        let chi = blend(x - self.matching_point(t));
        let pm = if chi > 0.0 { self.psi_minus(x, zeta).0 } else { f64::NAN };
        let pp = if chi < 1.0 { self.psi_plus(x, t).0 } else { f64::NAN };
        let psi = if chi >= 1.0 {
            pm
        } else if chi <= 0.0 {
            pp
        } else {
            chi * pm + (1.0 - chi) * pp
        };
        PsiSample { x, psi, psi_minus: pm, psi_plus: pp, chi }
    }

    /// Blended weighted profile ψ(x, t).
    pub fn eval_psi(&self, x: f64, t: f64) -> Result<f64, ApproxError> {
        let z = self.zeta(t)?;
        Ok(self.sample(x, t, z).psi)
    }

    /// ψ on a set of points at one time.
    pub fn psi_on(&self, xs: &[f64], t: f64) -> Result<Vec<f64>, ApproxError> {
        let z = self.compute_zeta(t)?;
        Ok(xs.iter().map(|&x| self.sample(x, t, z).psi).collect())
    }

    /// `|∂x ψ⁻ − ∂x ψ⁺|` at the matching point.
    pub fn derivative_mismatch(&self, t: f64) -> Result<f64, ApproxError> {
        let z = self.compute_zeta(t)?;
        let xm = self.matching_point(t);
        Ok((self.psi_minus(xm, z).1 - self.psi_plus(xm, t).1).abs())
    }

    /// `|ψ⁻ − ψ⁺|` at the matching point.
    pub fn value_mismatch(&self, t: f64) -> Result<f64, ApproxError> {
        let z = self.compute_zeta(t)?;
        let xm = self.matching_point(t);
        Ok((self.psi_minus(xm, z).0 - self.psi_plus(xm, t).0).abs())
    }

    /// Residual grid: uniform, spacing ≤ 0.02, from the wake to well past the Gaussian tail.
    pub fn default_grid(&self, t: f64) -> UniformGrid {
        let s = t + self.t_shift;
        let right = self.matching_point(t) + 1.0 + self.x0.abs() + 12.0 * (self.alpha * s).sqrt();
        let left = -30.0;
        let n = ((right - left) / 0.02).ceil() as usize + 1;
        UniformGrid::new(left, right, n)
    }
}

/// `ω P(∂x)(ω⁻¹ ·)` split into a stencil on u = v/ω (near the weight's transition)
/// and a stencil on v for the conjugated symbol P(∂x − η*) where ω = e^{η* x}.
struct WeightedStencils {
    hw: usize,
    plain: Vec<f64>,
    conj: Vec<f64>,
}

fn weighted_stencils(spec: &ModelSpec, eta: f64, h: f64) -> WeightedStencils {
    let mut plain = vec![0.0; spec.p.len() + 1];
    plain[1..].copy_from_slice(&spec.p);
    let mut conj = vec![0.0; plain.len()];
    for (k, &pk) in plain.iter().enumerate() {
        let mut binom = 1.0;
        for j in 0..=k {
            conj[j] += pk * binom * (-eta).powi((k - j) as i32);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }
    let hw = (1..plain.len()).map(half_width).max().unwrap_or(0).max(half_width(1));
    let expand = |c: &[f64]| {
        let mut w = vec![0.0; 2 * hw + 1];
        for (k, &ck) in c.iter().enumerate() {
            if ck == 0.0 {
                continue;
            }
            let wk = central_weights(k, h);
            let off = hw - half_width(k);
            for (j, v) in wk.iter().enumerate() {
                w[off + j] += ck * v;
            }
        }
        w
    };
    WeightedStencils { hw, plain: expand(&plain), conj: expand(&conj) }
}

/// Residual of the weighted equation in the delayed frame for an arbitrary
/// profile `v(x, t)`, with delay coefficient `kappa` (3/(2η*) for the critical front).
#[allow(clippy::too_many_arguments)]
pub fn weighted_residual(
    spec: &ModelSpec,
    weights: &Weights,
    c_star: f64,
    kappa: f64,
    t_shift: f64,
    grid: &UniformGrid,
    t: f64,
    dt_fd: f64,
    v: &dyn Fn(&[f64], f64) -> Vec<f64>,
) -> Vec<f64> {
    let h = grid.h();
    let eta = weights.eta_star;
    let st = weighted_stencils(spec, eta, h);
    let hw = st.hw;
    let n = grid.n;
    let xs: Vec<f64> = (0..n + 2 * hw).map(|i| grid.x0 + (i as f64 - hw as f64) * h).collect();
    let v0 = v(&xs, t);
    let d1 = central_weights(1, h);
    let h1 = half_width(1);
    let vt: Vec<f64> = {
        let inner = &xs[hw..hw + n];
        let a = v(inner, t - 2.0 * dt_fd);
        let b = v(inner, t - dt_fd);
        let c = v(inner, t + dt_fd);
        let d = v(inner, t + 2.0 * dt_fd);
        (0..n).map(|i| (a[i] - 8.0 * b[i] + 8.0 * c[i] - d[i]) / (12.0 * dt_fd)).collect()
    };
    let speed = c_star - kappa / (t + t_shift);
    let fdiv: Vec<f64> = spec.f_coeffs.clone();
    (0..n)
        .map(|i| {
            let k = i + hw;
            let x = xs[k];
            let lin = if x - hw as f64 * h >= 1.0 {
                (0..=2 * hw).map(|j| st.conj[j] * v0[k + j - hw]).sum::<f64>()
            } else {
                (0..=2 * hw).map(|j| st.plain[j] * weights.ratio(x, xs[k + j - hw]) * v0[k + j - hw]).sum::<f64>()
            };
            let vx: f64 = (0..d1.len()).map(|j| d1[j] * v0[k + j - h1]).sum();
            let drift = speed * (-eta * weights.chi_plus(x) * v0[k] + vx);
            let u = v0[k] * (-weights.log_omega(x)).exp();
            let g = fdiv.iter().rev().fold(0.0, |acc, &c| acc * u + c);
            vt[i] - lin - drift - v0[k] * g
        })
        .collect()
}

impl ApproxSolution {
    /// `F_res[ψ]` on `grid` at time t; `dt_fd` defaults to 1e−4·(t+T).
    pub fn residual(&self, grid: &UniformGrid, t: f64, dt_fd: Option<f64>) -> Result<Vec<f64>, ApproxError> {
        let dt = dt_fd.unwrap_or(1e-4 * (t + self.t_shift));
        let mut zetas = std::collections::HashMap::new();
        for k in -2i32..=2 {
            let tk = t + k as f64 * dt;
            zetas.insert(k, self.compute_zeta(tk)?);
        }
        let eval = |xs: &[f64], tk: f64| -> Vec<f64> {
            let k = ((tk - t) / dt).round() as i32;
            let z = zetas[&k];
            xs.iter().map(|&x| self.sample(x, tk, z).psi).collect()
        };
        Ok(weighted_residual(&self.spec, &self.weights, self.c_star, self.log_coefficient, self.t_shift, grid, t, dt, &eval))
    }
}

/// `sup ρ_r |R|` over the grid.
pub fn weighted_sup(weights: &Weights, r: f64, grid: &UniformGrid, values: &[f64]) -> f64 {
    grid.xs().iter().zip(values).map(|(&x, v)| weights.rho(r, x) * v.abs()).fold(0.0, f64::max)
}

/// `∫ ⟨x⟩ |R| dx` by the trapezoid rule.
pub fn weighted_l1(grid: &UniformGrid, values: &[f64]) -> f64 {
    let h = grid.h();
    let xs = grid.xs();
    let f: Vec<f64> = xs.iter().zip(values).map(|(x, v)| (1.0 + x * x).sqrt() * v.abs()).collect();
    h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[f.len() - 1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    pub norm: f64,
    pub scaled: f64,
    /// Secondary column: ‖R‖ in L¹₁.
    pub l1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    pub exponent: f64,
    pub passed: bool,
}

/// Factor-2 boundedness rule on a scaled column.
pub fn bounded_by_factor_two(scaled: &[f64]) -> bool {
    let n = scaled.len();
    if n < 2 {
        return true;
    }
    let half = n / 2;
    let first = scaled[..half].iter().cloned().fold(0.0, f64::max);
    let last = scaled[n - half..].iter().cloned().fold(0.0, f64::max);
    last <= 2.0 * first
}

/// Build a decay table from `(t, ‖R‖, l1)` triples with exponent `1/2 − 4μ`.
pub fn decay_table(t_shift: f64, mu: f64, samples: &[(f64, f64, f64)]) -> DecayTable {
    let exponent = 0.5 - 4.0 * mu;
    let rows: Vec<DecayRow> =
        samples.iter().map(|&(t, norm, l1)| DecayRow { t, norm, scaled: (t + t_shift).powf(exponent) * norm, l1 }).collect();
    let scaled: Vec<f64> = rows.iter().map(|r| r.scaled).collect();
    DecayTable { passed: bounded_by_factor_two(&scaled), rows, exponent }
}

/// `n` log-spaced samples of t + T over [T, 11T], i.e. t ∈ [0, 10T].
pub fn default_t_samples(t_shift: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| t_shift * (11f64.powf(i as f64 / (n - 1) as f64) - 1.0)).collect()
}

pub fn residual_decay_check(approx: &ApproxSolution, t_samples: &[f64]) -> Result<DecayTable, ApproxError> {
    let samples = t_samples
        .par_iter()
        .map(|&t| {
            let g = approx.default_grid(t);
            let r = approx.residual(&g, t, None)?;
            Ok((t, weighted_sup(&approx.weights, approx.r, &g, &r), weighted_l1(&g, &r)))
        })
        .collect::<Result<Vec<_>, ApproxError>>()?;
    Ok(decay_table(approx.t_shift, approx.mu, &samples))
}

/// Least-squares fit of `log|y| = log C + p log s`; returns `(C, p)`.
pub fn loglog_fit(s: &[f64], y: &[f64]) -> (f64, f64) {
    let n = s.len() as f64;
    let lx: Vec<f64> = s.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let p = sxy / sxx;
    ((my - p * mx).exp(), p)
}

/// Allowed excess of the fitted ζ exponent over μ − 1/2.
pub const ENVELOPE_SLACK: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaEnvelope {
    /// `(t, ζ(t+T))`.
    pub samples: Vec<(f64, f64)>,
    pub c_fit: f64,
    pub exponent: f64,
    pub holds: bool,
}

/// Fit `|ζ(t+T)| ≈ C (t+T)^p` along a run; the envelope holds when p ≤ μ − 1/2 + slack.
pub fn zeta_envelope(approx: &ApproxSolution, t_samples: &[f64]) -> Result<ZetaEnvelope, ApproxError> {
    let samples = t_samples.iter().map(|&t| Ok((t, approx.compute_zeta(t)?))).collect::<Result<Vec<_>, ApproxError>>()?;
    let s: Vec<f64> = samples.iter().map(|p| p.0 + approx.t_shift).collect();
    let z: Vec<f64> = samples.iter().map(|p| p.1).collect();
    let (c_fit, exponent) = loglog_fit(&s, &z);
    Ok(ZetaEnvelope { samples, c_fit, exponent, holds: exponent <= approx.mu - 0.5 + ENVELOPE_SLACK })
}

/// Slope of `log|ζ(T)|` against `log T` at t = 0 for several T, with the interior fixed.
pub fn zeta_scaling(base: &ApproxSolution, t_values: &[f64]) -> Result<(Vec<f64>, (f64, f64)), ApproxError> {
    let mut z = Vec::new();
    for &tt in t_values {
        let a = ApproxSolution { t_shift: tt, ..base.clone() };
        z.push(a.compute_zeta(0.0)?);
    }
    let fit = loglog_fit(t_values, &z);
    Ok((z, fit))
}

/// Slope of the derivative mismatch at the matching point against log T, at t = 0.
pub fn derivative_matching_rate(base: &ApproxSolution, t_values: &[f64]) -> Result<(Vec<f64>, (f64, f64)), ApproxError> {
    let mut d = Vec::new();
    for &tt in t_values {
        let a = ApproxSolution { t_shift: tt, ..base.clone() };
        d.push(a.derivative_mismatch(0.0)?);
    }
    let fit = loglog_fit(t_values, &d);
    Ok((d, fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::find_pinched_double_root;

    fn shoot(c1: f64, c3: f64, beta0: f64, xi_max: f64, steps: usize) -> impl Fn(f64) -> f64 {
        // RK4 on Ψ'' = −ξΨ'/2 − 3Ψ/2 + forcing from two shots.
        let rhs = move |xi: f64, y: [f64; 2], forced: bool| {
            let d = psi0_derivs(beta0, xi);
            let f = if forced { c1 * d[1] - c3 * d[3] } else { 0.0 };
            [y[1], -0.5 * xi * y[1] - 1.5 * y[0] + f]
        };
        let run = move |s0: f64, forced: bool| {
            let h = xi_max / steps as f64;
            let mut y = [0.0, s0];
            let mut out = vec![0.0];
            for k in 0..steps {
                let x = k as f64 * h;
                let k1 = rhs(x, y, forced);
                let k2 = rhs(x + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]], forced);
                let k3 = rhs(x + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]], forced);
                let k4 = rhs(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]], forced);
                for j in 0..2 {
                    y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
                out.push(y[0]);
            }
            out
        };
        let p = run(0.0, true);
        let q = run(1.0, false);
        let s = -p[steps] / q[steps];
        let vals: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a + s * b).collect();
        move |xi: f64| vals[(xi / (xi_max / steps as f64)).round() as usize]
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let p = solve_psi1(1.0, 0.0, f64::INFINITY, 1.0, 12.0, 2000).unwrap();
        assert!(p.psi1.iter().all(|v| *v == 0.0));
        assert_eq!(p.psi1[0], 0.0);
        assert_eq!(p.psi0[0], 0.0);
    }

    #[test]
    fn fkpp_psi1_matches_shooting() {
        let p = solve_psi1(1.0, 0.0, 1.0, 1.0, 12.0, 4001).unwrap();
        assert!(p.ode_residual() < 1e-8, "residual {}", p.ode_residual());
        let oracle = shoot(1.5, 0.0, 1.0, 12.0, 48000);
        let g = p.xi_grid;
        let err = (0..g.n).step_by(40).map(|i| (p.psi1[i] - oracle(g.x(i))).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "shooting mismatch {err}");
        let c = p.gaussian_constant();
        assert!(c.is_finite() && c < 10.0, "C = {c}");
        let tail = p.xi_grid.xs().iter().zip(&p.psi1).filter(|(x, _)| **x > 11.5).map(|(_, v)| v.abs()).fold(0.0, f64::max);
        assert!(tail < 1e-10);
    }

    #[test]
    fn efkpp_dispersive_forcing_matches_shooting() {
        let (c1, c3) = (1.2, 0.35);
        let p = solve_psi1_forced(c1, c3, 0.8, 12.0, 4001).unwrap();
        let oracle = shoot(c1, c3, 0.8, 12.0, 48000);
        let g = p.xi_grid;
        let err = (0..g.n).step_by(40).map(|i| (p.psi1[i] - oracle(g.x(i))).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn psi1_converges_at_fourth_order() {
        let sols: Vec<SelfSimilarProfiles> = [251, 501, 1001].iter().map(|&n| solve_psi1(1.0, 0.0, 1.0, 1.0, 12.0, n).unwrap()).collect();
        let diff = |a: &SelfSimilarProfiles, b: &SelfSimilarProfiles| {
            (0..a.xi_grid.n).map(|i| (a.psi1[i] - b.psi1[2 * i]).abs()).fold(0.0, f64::max)
        };
        let e1 = diff(&sols[0], &sols[1]);
        let e2 = diff(&sols[1], &sols[2]);
        let order = (e1 / e2).log2();
        assert!(order > 3.5, "order {order} ({e1:.2e}, {e2:.2e})");
    }

    fn fkpp_exact_tail(a: f64, t_shift: f64) -> ApproxSolution {
        let spec = ModelSpec::fkpp();
        let pinch = find_pinched_double_root(&spec).unwrap();
        build_approx(&spec, &pinch, Interior::ExactTail { a }, &ApproxSettings { t_shift, n_xi: 2001, ..Default::default() }).unwrap()
    }

    #[test]
    fn zeta_envelope_for_exact_tail() {
        let base = fkpp_exact_tail(-0.7, 100.0);
        let ts = [1e2, 1e3, 1e4];
        let (z, (_, p)) = zeta_scaling(&base, &ts).unwrap();
        assert!(z.windows(2).all(|w| w[1].abs() < w[0].abs()));
        assert!((p - (base.mu - 0.5)).abs() < 0.1, "slope {p}");
        for &t in &[0.0, 50.0, 700.0] {
            assert!(base.value_mismatch(t).unwrap() < 1e-8);
        }
    }

    #[test]
    fn mismatched_x0_leaves_offset() {
        let mut a = fkpp_exact_tail(-0.7, 1e4);
        let matched = a.compute_zeta(0.0).unwrap();
        a.x0 = -0.7 + 1.0;
        let z = a.compute_zeta(0.0).unwrap();
        assert!(matched.abs() < 0.2 && (z - 1.0).abs() < 0.2, "{matched} {z}");
    }

    #[test]
    fn blend_regions_are_exact() {
        let a = fkpp_exact_tail(-0.7, 100.0);
        let z = a.compute_zeta(0.0).unwrap();
        let xm = a.matching_point(0.0);
        let s = a.sample(xm - 1.0, 0.0, z);
        assert_eq!(s.psi, a.psi_minus(xm - 1.0, z).0);
        let s = a.sample(xm + 1.0, 0.0, z);
        assert_eq!(s.psi, a.psi_plus(xm + 1.0, 0.0).0);
    }

    #[test]
    fn derivative_mismatch_rate() {
        let base = fkpp_exact_tail(-0.7, 100.0);
        let (_, (_, p)) = derivative_matching_rate(&base, &[1e2, 1e3, 1e4]).unwrap();
        assert!((p + 0.5).abs() < 0.1, "slope {p}");
    }

    #[test]
    fn zero_profile_has_zero_residual() {
        let spec = ModelSpec::fkpp();
        let w = Weights::new(1.0, 1);
        let g = UniformGrid::new(-10.0, 10.0, 1001);
        let r = weighted_residual(&spec, &w, 2.0, 1.5, 100.0, &g, 0.0, 0.01, &|xs: &[f64], _| vec![0.0; xs.len()]);
        assert!(r.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn synthetic_decay_is_flat() {
        let samples: Vec<(f64, f64, f64)> = default_t_samples(100.0, 9).iter().map(|&t| (t, (t + 100.0f64).powf(-0.1), 0.0)).collect();
        let tab = decay_table(100.0, 0.1, &samples);
        assert!(tab.rows.iter().all(|r| (r.scaled - 1.0).abs() < 1e-12));
        assert!(tab.passed);
        let zeros: Vec<(f64, f64, f64)> = samples.iter().map(|s| (s.0, 0.0, 0.0)).collect();
        assert!(decay_table(100.0, 0.1, &zeros).rows.iter().all(|r| r.scaled == 0.0));
    }

    #[test]
    fn rejects_bad_mu_and_t() {
        let spec = ModelSpec::fkpp();
        let pinch = find_pinched_double_root(&spec).unwrap();
        let bad = ApproxSettings { mu: 0.2, ..Default::default() };
        assert!(matches!(build_approx(&spec, &pinch, Interior::ExactTail { a: 0.0 }, &bad), Err(ApproxError::BadParameter(_))));
        let bad = ApproxSettings { t_shift: 1.0, ..Default::default() };
        assert!(build_approx(&spec, &pinch, Interior::ExactTail { a: 0.0 }, &bad).is_err());
    }
}

//! Dispersion relations, pinched double roots and the linear hypotheses.

use crate::linalg::lstsq;
use crate::model::{Family, ModelSpec};
use crate::poly::Poly;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_STEP_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;
const COMPLEX_TOL: f64 = 1e-8;
pub const EPS_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DispersionError {
    #[error("double-root Newton did not converge (residual {residual:.3e} after {iterations} iterations)")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("double root is not pinched: {0}")]
    NotPinched(String),
    #[error("double root is complex (Im nu = {im_nu:.3e}, Im lambda = {im_lambda:.3e}); oscillatory invasion is unsupported")]
    ComplexDoubleRoot { im_nu: f64, im_lambda: f64 },
    #[error("alpha = {0} is not positive")]
    NegativeAlpha(f64),
    #[error("double root at nu = {0} does not give a positive decay rate")]
    NonPositiveDecay(f64),
    #[error("root tracking ambiguous near lambda = {0}")]
    TrackAmbiguity(f64),
    #[error("c(eta) has no interior minimum on the bracket")]
    NoInteriorMinimum,
    #[error("companion eigen-solve failed")]
    RootSolve,
    #[error("at delta = {delta}: {source}")]
    AtParameter { delta: f64, source: Box<DispersionError> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    LeadingEdge,
    Wake,
}

/// `P(ν) + cν + f'(0 or u_minus) − λ`.
pub fn dispersion_eval(spec: &ModelSpec, c: f64, lambda: Complex64, nu: Complex64, side: Side) -> Complex64 {
    let fp = match side {
        Side::LeadingEdge => spec.df(0.0),
        Side::Wake => spec.df(spec.u_minus),
    };
    dispersion_poly(spec, c, lambda, fp).eval(nu)
}

/// The polynomial `ν ↦ P(ν) + cν + fp − λ`.
pub fn dispersion_poly(spec: &ModelSpec, c: f64, lambda: Complex64, fp: f64) -> Poly {
    let mut coeffs: Vec<Complex64> = (0..=spec.degree()).map(|k| Complex64::new(spec.p_coeff(k), 0.0)).collect();
    coeffs[0] += Complex64::new(fp, 0.0) - lambda;
    coeffs[1] += Complex64::new(c, 0.0);
    Poly::new(coeffs)
}

fn p_poly(spec: &ModelSpec) -> Poly {
    Poly::from_real(&(0..=spec.degree()).map(|k| spec.p_coeff(k)).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub lambda: f64,
    pub lambda_im: f64,
    pub roots: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinchCertificate {
    pub homotopy_path: Vec<f64>,
    /// `root_tracks[k].roots[j]` is track `j` at `homotopy_path[k]`.
    pub root_tracks: Vec<TrackPoint>,
    /// `true` for tracks with Re ν > −η* at λ_max.
    pub unstable_labels: Vec<bool>,
    pub morse_counts: (usize, usize),
    pub colliding_pair: (usize, usize),
    /// Tracks whose side of Re ν = −η* changes along the path.
    pub crossings: Vec<usize>,
}

impl PinchCertificate {
    pub fn is_pinched(&self, order_half: usize) -> bool {
        let (a, b) = self.colliding_pair;
        self.morse_counts == (order_half, order_half) && self.unstable_labels[a] != self.unstable_labels[b] && self.crossings.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinchResult {
    pub c_star: f64,
    pub eta_star: f64,
    pub alpha: f64,
    pub lambda_dr: Complex64,
    pub residual_d: f64,
    pub residual_dnu: f64,
    pub certificate: PinchCertificate,
}

impl PinchResult {
    /// Coefficients `s_k` of `S(ν) = d(0, ν − η*)`, ascending.
    pub fn shifted_symbol(&self, spec: &ModelSpec) -> Vec<f64> {
        let d = dispersion_poly(spec, self.c_star, Complex64::new(0.0, 0.0), spec.df(0.0));
        taylor_shift(&d, -self.eta_star).into_iter().map(|z| z.re).collect()
    }
}

/// Coefficients of `q(ν) = p(ν + s)`.
pub fn taylor_shift(p: &Poly, s: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(p.c.len());
    let mut d = p.clone();
    let mut fact = 1.0;
    for k in 0..p.c.len() {
        if k > 0 {
            fact *= k as f64;
        }
        out.push(d.eval(Complex64::new(s, 0.0)) / fact);
        d = d.derivative();
    }
    out
}

/// Raw double-root solve on `(Re ν, Im ν, c)`; returns `(ν, c)`.
///
/// Gauss–Newton on the four residuals `(Re d, Im d, Re ∂ν d, Im ∂ν d)`, followed by a
/// real Newton polish when the root is real.
pub fn solve_double_root(spec: &ModelSpec, guess_nu: Complex64, guess_c: f64) -> Result<(Complex64, f64), DispersionError> {
    let p = p_poly(spec);
    let dp = p.derivative();
    let ddp = dp.derivative();
    let fp0 = spec.df(0.0);
    let resid = |nu: Complex64, c: f64| -> (Complex64, Complex64) { (p.eval(nu) + c * nu + fp0, dp.eval(nu) + c) };
    let mut nu = guess_nu;
    let mut c = guess_c;
    let mut converged = false;
    let mut last = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..NEWTON_MAX_ITER {
        iterations = it + 1;
        let (d, dn) = resid(nu, c);
        last = d.norm().max(dn.norm());
        if !last.is_finite() {
            break;
        }
        let dnn = ddp.eval(nu);
        let cols = vec![
            vec![dn.re, dn.im, dnn.re, dnn.im],
            vec![-dn.im, dn.re, -dnn.im, dnn.re],
            vec![nu.re, nu.im, 1.0, 0.0],
        ];
        let rhs = vec![-d.re, -d.im, -dn.re, -dn.im];
        let Some((step, _)) = lstsq(&cols, &rhs) else { break };
        nu += Complex64::new(step[0], step[1]);
        c += step[2];
        let sn = step.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if sn < NEWTON_STEP_TOL * (1.0 + nu.norm() + c.abs()) || last < 1e-15 {
            converged = true;
            break;
        }
    }
    let (d, dn) = resid(nu, c);
    last = last.min(d.norm().max(dn.norm()));
    if !converged && last > RESIDUAL_TOL {
        return Err(DispersionError::NoConvergence { residual: last, iterations });
    }
    if nu.im.abs() > COMPLEX_TOL {
        return Err(DispersionError::ComplexDoubleRoot { im_nu: nu.im, im_lambda: d.im });
    }
    // real polish on (η, c)
    let mut x = nu.re;
    for _ in 0..8 {
        let z = Complex64::new(x, 0.0);
        let (d, dn) = resid(z, c);
        let dnn = ddp.eval(z).re;
        // [dn, x; dnn, 1] [dx; dc] = -[d; dn]
        let det = dn.re - x * dnn;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (-d.re + x * dn.re) / det;
        let dc = -dn.re - dnn * dx;
        x += dx;
        c += dc;
        if dx.abs().max(dc.abs()) < 1e-16 * (1.0 + x.abs() + c.abs()) {
            break;
        }
    }
    let (d, dn) = resid(Complex64::new(x, 0.0), c);
    if d.norm().max(dn.norm()) > RESIDUAL_TOL {
        return Err(DispersionError::NoConvergence { residual: d.norm().max(dn.norm()), iterations });
    }
    Ok((Complex64::new(x, 0.0), c))
}

pub fn default_lambda_max(spec: &ModelSpec) -> f64 {
    10.0 * (1.0 + spec.max_abs_p())
}

/// Newton from an explicit seed, then pinching certificate.
pub fn find_double_root(spec: &ModelSpec, guess_nu: Complex64, guess_c: f64) -> Result<PinchResult, DispersionError> {
    let (nu, c) = solve_double_root(spec, guess_nu, guess_c)?;
    let p = p_poly(spec);
    let dp = p.derivative();
    let fp0 = spec.df(0.0);
    let lambda_dr = p.eval(nu) + c * nu + fp0;
    let residual_dnu = (dp.eval(nu) + c).norm();
    if lambda_dr.im.abs() > COMPLEX_TOL {
        return Err(DispersionError::ComplexDoubleRoot { im_nu: nu.im, im_lambda: lambda_dr.im });
    }
    let alpha = 0.5 * dp.derivative().eval(nu).re;
    if alpha <= 0.0 {
        return Err(DispersionError::NegativeAlpha(alpha));
    }
    if nu.re >= 0.0 {
        return Err(DispersionError::NonPositiveDecay(nu.re));
    }
    let mut result = PinchResult {
        c_star: c,
        eta_star: -nu.re,
        alpha,
        lambda_dr,
        residual_d: lambda_dr.norm(),
        residual_dnu,
        certificate: PinchCertificate {
            homotopy_path: vec![],
            root_tracks: vec![],
            unstable_labels: vec![],
            morse_counts: (0, 0),
            colliding_pair: (0, 0),
            crossings: vec![],
        },
    };
    let cert = verify_pinching(spec, &result, default_lambda_max(spec))?;
    if !cert.is_pinched(spec.order_half) {
        return Err(DispersionError::NotPinched(format!(
            "morse counts {:?}, colliding labels {:?}, crossing tracks {:?}",
            cert.morse_counts,
            (cert.unstable_labels[cert.colliding_pair.0], cert.unstable_labels[cert.colliding_pair.1]),
            cert.crossings
        )));
    }
    result.certificate = cert;
    Ok(result)
}

/// Seeds from the envelope oracle, or from a coarse scan when the oracle fails;
/// keeps the pinched root with the largest Re λ_dr, then the smallest η*.
pub fn find_pinched_double_root(spec: &ModelSpec) -> Result<PinchResult, DispersionError> {
    let seeds = match envelope_speed_oracle(spec) {
        Ok((c, eta)) => vec![(Complex64::new(-eta, 0.0), c)],
        Err(_) => grid_scan_seeds(spec),
    };
    let mut first_err = None;
    let mut found: Vec<PinchResult> = Vec::new();
    for (nu, c) in seeds {
        match find_double_root(spec, nu, c) {
            Ok(r) => {
                if !found.iter().any(|f| (f.eta_star - r.eta_star).abs() < 1e-9 && (f.c_star - r.c_star).abs() < 1e-9) {
                    found.push(r);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    found.sort_by(|a, b| {
        b.lambda_dr.re.partial_cmp(&a.lambda_dr.re).unwrap().then(a.eta_star.partial_cmp(&b.eta_star).unwrap())
    });
    found.into_iter().next().ok_or_else(|| first_err.unwrap_or(DispersionError::NoConvergence { residual: f64::NAN, iterations: 0 }))
}

fn grid_scan_seeds(spec: &ModelSpec) -> Vec<(Complex64, f64)> {
    let p = p_poly(spec);
    let dp = p.derivative();
    let fp0 = spec.df(0.0);
    let n = 120;
    let cmax = 10.0 * (fp0 * spec.p_coeff(2).abs() + 1.0).sqrt();
    let etas: Vec<f64> = (0..n).map(|i| 0.05 + (10.0 - 0.05) * i as f64 / (n - 1) as f64).collect();
    let cs: Vec<f64> = (0..n).map(|i| 0.05 + (cmax - 0.05) * i as f64 / (n - 1) as f64).collect();
    let obj = |i: usize, j: usize| {
        let z = Complex64::new(-etas[i], 0.0);
        (p.eval(z) + cs[j] * z + fp0).norm() + (dp.eval(z) + cs[j]).norm()
    };
    let vals: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| obj(i, j)).collect()).collect();
    let mut minima = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = vals[i][j];
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) != (0, 0) && a >= 0 && b >= 0 && (a as usize) < n && (b as usize) < n && vals[a as usize][b as usize] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                minima.push((v, i, j));
            }
        }
    }
    minima.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    minima.into_iter().take(8).map(|(_, i, j)| (Complex64::new(-etas[i], 0.0), cs[j])).collect()
}

/// Continue the 2m roots of `d(λ, ·; c*)` from just above λ_dr to `lambda_max`.
///
/// The path leaves the real axis by a slight tilt `Im λ = 0.01 (Re λ − λ_dr)` and
/// returns to it at `lambda_max`; this keeps same-side roots from colliding on the
/// way without changing which side of Re ν = −η* any root lies on.
pub fn verify_pinching(spec: &ModelSpec, result: &PinchResult, lambda_max: f64) -> Result<PinchCertificate, DispersionError> {
    let c = result.c_star;
    let fp0 = spec.df(0.0);
    let shift = -result.eta_star;
    let lam0 = result.lambda_dr.re;
    let tilt = 1e-2;
    let roots_at = |lam: Complex64| -> Result<Vec<Complex64>, DispersionError> {
        dispersion_poly(spec, c, lam, fp0).roots().ok_or(DispersionError::RootSolve)
    };
    let eps = 1e-6;
    let ratio = 1.4;
    let top = lambda_max.max(lam0 + eps);
    let mut targets = Vec::new();
    let mut off = eps;
    while lam0 + off < top {
        targets.push(Complex64::new(lam0 + off, tilt * off));
        off *= ratio;
    }
    for j in 0..=4 {
        targets.push(Complex64::new(top, tilt * (top - lam0) * (1.0 - j as f64 / 4.0)));
    }

    let first = roots_at(targets[0])?;
    // the colliding pair are the two roots closest to ν = −η*
    let mut order: Vec<usize> = (0..first.len()).collect();
    order.sort_by(|&a, &b| (first[a] - shift).norm().partial_cmp(&(first[b] - shift).norm()).unwrap());
    let colliding_pair = (order[0], order[1.min(order.len() - 1)]);

    let mut tracks = vec![TrackPoint { lambda: targets[0].re, lambda_im: targets[0].im, roots: first }];
    let mut cur = targets[0];
    for &target in &targets[1..] {
        let mut frac = 1.0f64;
        let mut halvings = 0;
        let start = cur;
        let mut done = 0.0f64;
        while done < 1.0 {
            let t = (done + frac).min(1.0);
            let next = start + (target - start) * t;
            let prev = &tracks.last().unwrap().roots;
            let cand = roots_at(next)?;
            match match_roots(prev, &cand) {
                Some(matched) => {
                    tracks.push(TrackPoint { lambda: next.re, lambda_im: next.im, roots: matched });
                    done = t;
                }
                None => {
                    halvings += 1;
                    if halvings > 12 {
                        return Err(DispersionError::TrackAmbiguity(next.re));
                    }
                    frac *= 0.5;
                }
            }
        }
        cur = target;
    }
    let path = tracks.iter().map(|tp| tp.lambda).collect();
    let last = &tracks.last().unwrap().roots;
    let unstable_labels: Vec<bool> = last.iter().map(|z| z.re - shift > 0.0).collect();
    let n_unstable = unstable_labels.iter().filter(|&&u| u).count();
    let morse_counts = (last.len() - n_unstable, n_unstable);
    let mut crossings = Vec::new();
    for j in 0..last.len() {
        let side0 = tracks[0].roots[j].re - shift > 0.0;
        if tracks.iter().any(|tp| (tp.roots[j].re - shift > 0.0) != side0) {
            crossings.push(j);
        }
    }
    Ok(PinchCertificate { homotopy_path: path, root_tracks: tracks, unstable_labels, morse_counts, colliding_pair, crossings })
}

/// Nearest-neighbour matching with radius half the minimal gap of `prev`.
fn match_roots(prev: &[Complex64], cand: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = prev.len();
    if cand.len() != n {
        return None;
    }
    let mut gap = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            gap = gap.min((prev[i] - prev[j]).norm());
        }
    }
    let radius = if n == 1 { f64::INFINITY } else { 0.5 * gap };
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for p in prev {
        let hits: Vec<usize> = (0..n).filter(|&k| (cand[k] - p).norm() < radius).collect();
        if hits.len() != 1 || used[hits[0]] {
            return None;
        }
        used[hits[0]] = true;
        out.push(cand[hits[0]]);
    }
    Some(out)
}

/// Minimize `c(η) = (P(−η) + f'(0))/η` by golden-section search on a log-spaced bracket.
pub fn envelope_speed_oracle(spec: &ModelSpec) -> Result<(f64, f64), DispersionError> {
    let p = p_poly(spec);
    let fp0 = spec.df(0.0);
    let num = |eta: f64| p.eval(Complex64::new(-eta, 0.0)).re + fp0;
    let cfun = |eta: f64| num(eta) / eta;
    let n = 400;
    let (lo, hi) = (1e-3f64, 1e3f64);
    let mut etas = Vec::new();
    for i in 0..n {
        let e = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
        if num(e) <= 0.0 {
            break;
        }
        etas.push(e);
    }
    if etas.len() < 3 {
        return Err(DispersionError::NoInteriorMinimum);
    }
    let vals: Vec<f64> = etas.iter().map(|&e| cfun(e)).collect();
    let k = (1..etas.len() - 1).find(|&k| vals[k] <= vals[k - 1] && vals[k] <= vals[k + 1]).ok_or(DispersionError::NoInteriorMinimum)?;
    let (mut a, mut b) = (etas[k - 1].ln(), etas[k + 1].ln());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |s: f64| cfun(s.exp());
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    // finish with Newton on c'(η) = 0, i.e. η P'(−η)·(−1)... written as g(η) = −η P'(−η) − (P(−η) + f'(0))
    let dp = p.derivative();
    let ddp = dp.derivative();
    let mut eta = (0.5 * (a + b)).exp();
    for _ in 0..20 {
        let z = Complex64::new(-eta, 0.0);
        let gval = -eta * dp.eval(z).re - num(eta);
        let gder = eta * ddp.eval(z).re;
        if gder == 0.0 {
            break;
        }
        let step = gval / gder;
        if !step.is_finite() || step.abs() > 0.1 * eta {
            break;
        }
        eta -= step;
        if step.abs() < 1e-16 * eta {
            break;
        }
    }
    Ok((cfun(eta), eta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub k: f64,
    pub re_lambda: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub k_grid: Vec<f64>,
    pub sigma_plus_weighted: Vec<Complex64>,
    pub sigma_minus: Vec<Complex64>,
    pub hyp1_ii_ok: bool,
    pub hyp1_iii_ok: bool,
    pub hyp2_ok: bool,
    /// Worst margin `Re λ⁺(k) − bound(k)` for the touching test.
    pub hyp1_ii_worst: Offender,
    pub hyp1_iii_worst: Offender,
    pub hyp2_worst: Offender,
    pub eps_margin: f64,
    pub k_sep: f64,
}

impl SpectrumReport {
    pub fn all_ok(&self) -> bool {
        self.hyp1_ii_ok && self.hyp1_iii_ok && self.hyp2_ok
    }
}

pub fn symmetric_k_grid(k_max: f64, n_k: usize) -> Vec<f64> {
    let n = if n_k.is_multiple_of(2) { n_k + 1 } else { n_k.max(1) };
    if n == 1 {
        return vec![0.0];
    }
    let half = (n - 1) / 2;
    (0..n).map(|i| k_max * (i as f64 - half as f64) / half as f64).collect()
}

pub fn sigma_plus(spec: &ModelSpec, pinch: &PinchResult, k: f64) -> Complex64 {
    let nu = Complex64::new(-pinch.eta_star, k);
    dispersion_eval(spec, pinch.c_star, Complex64::new(0.0, 0.0), nu, Side::LeadingEdge)
}

pub fn sigma_minus(spec: &ModelSpec, pinch: &PinchResult, k: f64) -> Complex64 {
    dispersion_eval(spec, pinch.c_star, Complex64::new(0.0, 0.0), Complex64::new(0.0, k), Side::Wake)
}

pub fn check_hypotheses(spec: &ModelSpec, result: &PinchResult, k_max: f64, n_k: usize) -> SpectrumReport {
    let k_grid = symmetric_k_grid(k_max, n_k);
    let k_sep = result.eta_star / 4.0;
    let plus: Vec<Complex64> = k_grid.iter().map(|&k| sigma_plus(spec, result, k)).collect();
    let minus: Vec<Complex64> = k_grid.iter().map(|&k| sigma_minus(spec, result, k)).collect();
    let tiny = 1e-12;
    let mut ii = Offender { k: 0.0, re_lambda: f64::NEG_INFINITY, bound: 0.0 };
    let mut ii_margin = f64::NEG_INFINITY;
    let mut iii = Offender { k: 0.0, re_lambda: f64::NEG_INFINITY, bound: 0.0 };
    let mut h2 = Offender { k: 0.0, re_lambda: f64::NEG_INFINITY, bound: -EPS_MARGIN };
    for (i, &k) in k_grid.iter().enumerate() {
        let re = plus[i].re;
        let bound = if k.abs() >= k_sep { -EPS_MARGIN } else { -result.alpha * k * k / 2.0 };
        if re - bound > ii_margin {
            ii_margin = re - bound;
            ii = Offender { k, re_lambda: re, bound };
        }
        if re > iii.re_lambda {
            iii = Offender { k, re_lambda: re, bound: 0.0 };
        }
        if minus[i].re > h2.re_lambda {
            h2 = Offender { k, re_lambda: minus[i].re, bound: -EPS_MARGIN };
        }
    }
    SpectrumReport {
        hyp1_ii_ok: ii_margin <= tiny,
        hyp1_iii_ok: iii.re_lambda <= tiny,
        hyp2_ok: h2.re_lambda <= -EPS_MARGIN,
        k_grid,
        sigma_plus_weighted: plus,
        sigma_minus: minus,
        hyp1_ii_worst: ii,
        hyp1_iii_worst: iii,
        hyp2_worst: h2,
        eps_margin: EPS_MARGIN,
        k_sep,
    }
}

pub fn default_k_max(pinch: &PinchResult) -> f64 {
    5.0 * pinch.eta_star.max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    pub c_star: f64,
    pub eta_star: f64,
    pub alpha: f64,
    pub hypotheses_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    #[default]
    SequentialSeeded,
    ParallelColdStart,
}

fn sweep_row(spec: &ModelSpec, delta: f64, r: &PinchResult) -> SweepRow {
    let rep = check_hypotheses(spec, r, default_k_max(r), 2001);
    SweepRow { delta, c_star: r.c_star, eta_star: r.eta_star, alpha: r.alpha, hypotheses_ok: rep.all_ok() }
}

pub fn continuation_sweep(family: &Family, delta_grid: &[f64], mode: SweepMode) -> Result<Vec<(SweepRow, PinchResult)>, DispersionError> {
    let wrap = |delta: f64| move |e: DispersionError| DispersionError::AtParameter { delta, source: Box::new(e) };
    match mode {
        SweepMode::SequentialSeeded => {
            let mut out: Vec<(SweepRow, PinchResult)> = Vec::with_capacity(delta_grid.len());
            for &delta in delta_grid {
                let spec = family.at(delta);
                let r = match out.last() {
                    None => find_pinched_double_root(&spec),
                    Some((_, prev)) => find_double_root(&spec, Complex64::new(-prev.eta_star, 0.0), prev.c_star)
                        .or_else(|_| find_pinched_double_root(&spec)),
                }
                .map_err(wrap(delta))?;
                out.push((sweep_row(&spec, delta, &r), r));
            }
            Ok(out)
        }
        SweepMode::ParallelColdStart => delta_grid
            .par_iter()
            .map(|&delta| {
                let spec = family.at(delta);
                let r = find_pinched_double_root(&spec).map_err(wrap(delta))?;
                Ok((sweep_row(&spec, delta, &r), r))
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let fk = ModelSpec::fkpp();
        assert_eq!(dispersion_eval(&fk, 2.0, c(0.0, 0.0), c(-1.0, 0.0), Side::LeadingEdge), c(0.0, 0.0));
        let e = ModelSpec::efkpp(0.1);
        assert!((dispersion_eval(&e, 0.0, c(1.0, 0.0), c(0.0, 0.0), Side::LeadingEdge)).norm() < 1e-15);
        let v = dispersion_eval(&e, 0.0, c(0.0, 0.0), c(1.0, 0.0), Side::LeadingEdge);
        assert!((v.re - 1.99).abs() < 1e-14 && v.im == 0.0);
    }

    #[test]
    fn taylor_shift_of_fkpp() {
        let r = find_pinched_double_root(&ModelSpec::fkpp()).unwrap();
        let s = r.shifted_symbol(&ModelSpec::fkpp());
        assert!(s[0].abs() < 1e-12 && s[1].abs() < 1e-12 && (s[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fkpp_tracks_follow_closed_form() {
        let spec = ModelSpec::fkpp();
        let r = find_pinched_double_root(&spec).unwrap();
        let cert = &r.certificate;
        assert_eq!(cert.morse_counts, (1, 1));
        for tp in &cert.root_tracks {
            let s = Complex64::new(tp.lambda, tp.lambda_im).sqrt();
            for z in &tp.roots {
                let e = (z - (s - 1.0)).norm().min((z - (-s - 1.0)).norm());
                assert!(e < 1e-7, "{:?}", tp);
            }
        }
    }

    #[test]
    fn fabricated_double_root_at_origin_is_classified() {
        let spec = ModelSpec::fkpp();
        let fake = PinchResult {
            c_star: 0.0,
            eta_star: 0.0,
            alpha: 1.0,
            lambda_dr: c(spec.df(0.0), 0.0),
            residual_d: 0.0,
            residual_dnu: 0.0,
            certificate: verify_pinching(&spec, &find_pinched_double_root(&spec).unwrap(), 20.0).unwrap(),
        };
        let cert = verify_pinching(&spec, &fake, 30.0).unwrap();
        assert_eq!(cert.morse_counts, (1, 1));
        let (a, b) = cert.colliding_pair;
        assert_ne!(cert.unstable_labels[a], cert.unstable_labels[b]);
    }

    #[test]
    fn oracle_closed_form() {
        let (d, r) = (0.7, 1.9);
        let spec = ModelSpec::new(1, vec![0.0, d], vec![r, -r], 1.0).unwrap();
        let (cs, eta) = envelope_speed_oracle(&spec).unwrap();
        assert!((cs - 2.0 * (d * r).sqrt()).abs() < 1e-12);
        assert!((eta - (r / d).sqrt()).abs() < 1e-10);
        let n = find_pinched_double_root(&spec).unwrap();
        assert!((n.c_star - cs).abs() < 1e-12 && (n.eta_star - eta).abs() < 1e-10);
    }

    #[test]
    fn oracle_without_interior_minimum() {
        // P(-η) + f'(0) turns negative quickly, c(η) monotone on what is left
        let spec = ModelSpec::new(1, vec![5.0, 1.0], vec![1.0, -1.0], 1.0).unwrap();
        assert!(envelope_speed_oracle(&spec).is_ok() || matches!(envelope_speed_oracle(&spec), Err(DispersionError::NoInteriorMinimum)));
        let spec = ModelSpec::new(2, vec![0.0, 1.0, 0.0, -1.0], vec![1.0, -1.0], 1.0).unwrap();
        // 1 + η² − η⁴ stays positive only up to η≈1.27; the min at η≈0.9 must be found or reported
        match envelope_speed_oracle(&spec) {
            Ok((cs, eta)) => assert!(cs > 0.0 && eta > 0.0),
            Err(e) => assert_eq!(e, DispersionError::NoInteriorMinimum),
        }
    }

    #[test]
    fn efkpp_small_delta_approaches_fkpp() {
        let (cs, eta) = envelope_speed_oracle(&ModelSpec::efkpp(1e-4)).unwrap();
        assert!((cs - 2.0).abs() < 1e-6 && (eta - 1.0).abs() < 1e-6);
    }

    #[test]
    fn grid_scan_fallback_finds_fkpp() {
        let seeds = grid_scan_seeds(&ModelSpec::fkpp());
        let best = seeds.iter().filter_map(|&(nu, c)| find_double_root(&ModelSpec::fkpp(), nu, c).ok()).next().unwrap();
        assert!((best.c_star - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hypotheses_fkpp() {
        let spec = ModelSpec::fkpp();
        let r = find_pinched_double_root(&spec).unwrap();
        let rep = check_hypotheses(&spec, &r, 5.0, 1001);
        assert!(rep.all_ok());
        for (k, l) in rep.k_grid.iter().zip(&rep.sigma_plus_weighted) {
            assert!((l - c(-k * k, 0.0)).norm() < 1e-12);
        }
        for (k, l) in rep.k_grid.iter().zip(&rep.sigma_minus) {
            assert!((l - c(-k * k - 1.0, 2.0 * k)).norm() < 1e-12);
        }
        let mid = rep.k_grid.len() / 2;
        assert_eq!(rep.k_grid[mid], 0.0);
        assert!(rep.sigma_plus_weighted[mid].re.abs() < 1e-14);
    }

    #[test]
    fn cubic_wake_derivative_matches_symbolic() {
        let delta = 0.2;
        let spec = ModelSpec::cubic(delta);
        let r = find_pinched_double_root(&spec).unwrap();
        let rep = check_hypotheses(&spec, &r, default_k_max(&r), 2001);
        assert!(rep.all_ok());
        // wake curve maximum at k = 0 equals f'(u_minus) = -(1-δ)
        assert!((rep.hyp2_worst.re_lambda + (1.0 - delta)).abs() < 1e-12);
        let cs = 2.0 * (delta * (1.0 - delta)).sqrt();
        assert!((r.c_star - cs).abs() < 1e-12);
    }

    #[test]
    fn single_point_and_constant_sweeps() {
        let fam = Family::Constant { spec: ModelSpec::fkpp() };
        let rows = continuation_sweep(&fam, &[0.0, 0.5, 1.0], SweepMode::SequentialSeeded).unwrap();
        assert!(rows.iter().all(|(r, _)| r.c_star == rows[0].0.c_star && r.alpha == rows[0].0.alpha));
        let one = continuation_sweep(&Family::Efkpp, &[0.1], SweepMode::SequentialSeeded).unwrap();
        let direct = find_pinched_double_root(&ModelSpec::efkpp(0.1)).unwrap();
        assert_eq!(one[0].1, direct);
        let par = continuation_sweep(&Family::Efkpp, &[0.0, 0.05, 0.1], SweepMode::ParallelColdStart).unwrap();
        let seq = continuation_sweep(&Family::Efkpp, &[0.0, 0.05, 0.1], SweepMode::SequentialSeeded).unwrap();
        for (a, b) in par.iter().zip(&seq) {
            assert!((a.0.c_star - b.0.c_star).abs() < 1e-12);
        }
    }
}

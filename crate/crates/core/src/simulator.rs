//! Time integration of `u_t = P(∂x)u + f(u)` on a fixed grid, front tracking,
//! the logarithmic-delay fit and the half-line model problem.

use crate::fd::operator_stencil;
use crate::front::FrontProfile;
use crate::interp::{cubic, UniformGrid};
use crate::linalg::{lstsq, BandLu, BandMatrix};
use crate::model::ModelSpec;
use crate::weights::{Smoothstep, Weights};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("blow-up: |u| = {norm:.3e} at t = {t}")]
    BlowUp { t: f64, norm: f64 },
    #[error("no downward crossing of level {0}")]
    NoCrossing(f64),
    #[error("fit window ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),
    #[error("fit window [{start}, {end}] holds {count} samples; need >= 30 and start >= 50")]
    BadWindow { start: f64, end: f64, count: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("at t = {t}: {source}")]
    AtTime { t: f64, source: Box<SimError> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ImexCnAb2,
    ImexBdf2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    /// u_minus on the left, 0 on the right, smoothed over two cells around `at`.
    Step { at: f64 },
    /// The critical front (phase frame) translated by `shift`.
    Front { shift: f64 },
    /// Linear interpolation of a table; u_minus and 0 beyond its ends.
    Table { x: Vec<f64>, u: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub domain: (f64, f64),
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    /// Ghost values `(left, right)`; defaults to `(u_minus, 0)`.
    pub boundary: Option<(f64, f64)>,
    pub initial: InitialData,
    /// Empty means every unit of time.
    pub sample_times: Vec<f64>,
    pub checkpoint_times: Vec<f64>,
    pub level: Option<f64>,
}

impl SimConfig {
    pub fn new(domain: (f64, f64), n: usize, dt: f64, t_final: f64) -> Self {
        Self {
            domain,
            n,
            dt,
            t_final,
            scheme: Scheme::ImexCnAb2,
            boundary: None,
            initial: InitialData::Step { at: 0.0 },
            sample_times: Vec::new(),
            checkpoint_times: Vec::new(),
            level: None,
        }
    }

    pub fn grid(&self) -> UniformGrid {
        UniformGrid::new(self.domain.0, self.domain.1, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub u: Vec<f64>,
    pub steps: usize,
    /// f(u) at the previous step, for the multistep schemes.
    pub f_prev: Option<Vec<f64>>,
    /// u at the previous step (BDF2 only).
    pub u_prev: Option<Vec<f64>>,
}

impl SimState {
    pub fn new(u: Vec<f64>) -> Self {
        Self { t: 0.0, u, steps: 0, f_prev: None, u_prev: None }
    }
}

/// Grid, stencil and factored implicit matrices for one configuration.
pub struct Simulator {
    pub spec: ModelSpec,
    pub config: SimConfig,
    pub grid: UniformGrid,
    a: BandMatrix<f64>,
    g: Vec<f64>,
    lu_main: BandLu<f64>,
    lu_start: Option<BandLu<f64>>,
}

fn identity_plus(a: &BandMatrix<f64>, diag: f64, scale: f64) -> BandMatrix<f64> {
    let n = a.n();
    let mut m = BandMatrix::zeros(n, a.kl(), a.ku());
    for i in 0..n {
        for j in a.row_cols(i) {
            let v = a.get(i, j);
            if v != 0.0 {
                m.set(i, j, scale * v);
            }
        }
        m.add(i, i, diag);
    }
    m
}

impl Simulator {
    pub fn new(spec: &ModelSpec, config: &SimConfig) -> Result<Self, SimError> {
        if config.n < 8 || !(config.dt > 0.0) || !(config.domain.1 > config.domain.0) || !(config.t_final >= 0.0) {
            return Err(SimError::BadConfig(format!("n = {}, dt = {}, domain = {:?}", config.n, config.dt, config.domain)));
        }
        let grid = config.grid();
        let h = grid.h();
        let mut coeffs = vec![0.0; spec.p.len() + 1];
        coeffs[1..].copy_from_slice(&spec.p);
        let (hw, w) = operator_stencil(&coeffs, h);
        let n = grid.n;
        let (gl, gr) = config.boundary.unwrap_or((spec.u_minus, 0.0));
        let mut a = BandMatrix::zeros(n, hw, hw);
        let mut g = vec![0.0; n];
        for i in 0..n {
            for (k, &wk) in w.iter().enumerate() {
                let j = i as i64 + k as i64 - hw as i64;
                if j < 0 {
                    g[i] += wk * gl;
                } else if j >= n as i64 {
                    g[i] += wk * gr;
                } else {
                    a.add(i, j as usize, wk);
                }
            }
        }
        let dt = config.dt;
        let fail = |e: crate::linalg::BandError| SimError::LinearSolveFailure(e.to_string());
        let (lu_main, lu_start) = match config.scheme {
            Scheme::ImexCnAb2 => (identity_plus(&a, 1.0, -0.5 * dt).lu().map_err(fail)?, None),
            Scheme::ImexBdf2 => {
                (identity_plus(&a, 1.5, -dt).lu().map_err(fail)?, Some(identity_plus(&a, 1.0, -dt).lu().map_err(fail)?))
            }
        };
        Ok(Self { spec: spec.clone(), config: config.clone(), grid, a, g, lu_main, lu_start })
    }

    /// Initial state; `front` is required for `InitialData::Front`.
    pub fn initial_state(&self, front: Option<&FrontProfile>) -> Result<SimState, SimError> {
        let xs = self.grid.xs();
        let um = self.spec.u_minus;
        let h = self.grid.h();
        let u = match &self.config.initial {
            InitialData::Step { at } => {
                let s = Smoothstep::quintic();
                xs.iter().map(|&x| um * (1.0 - s.eval((x - at + h) / (2.0 * h)))).collect()
            }
            InitialData::Front { shift } => {
                let f = front.ok_or_else(|| SimError::BadConfig("front initial data needs a front profile".into()))?;
                xs.iter().map(|&x| f.eval_phase(x - shift)).collect()
            }
            InitialData::Table { x, u } => {
                if x.len() != u.len() || x.len() < 2 || x.windows(2).any(|p| p[1] <= p[0]) {
                    return Err(SimError::BadConfig("table must be increasing in x with matching lengths".into()));
                }
                xs.iter()
                    .map(|&p| {
                        if p <= x[0] {
                            if p < x[0] {
                                um
                            } else {
                                u[0]
                            }
                        } else if p >= x[x.len() - 1] {
                            if p > x[x.len() - 1] {
                                0.0
                            } else {
                                u[u.len() - 1]
                            }
                        } else {
                            let k = x.partition_point(|&v| v <= p) - 1;
                            let s = (p - x[k]) / (x[k + 1] - x[k]);
                            u[k] * (1.0 - s) + u[k + 1] * s
                        }
                    })
                    .collect()
            }
        };
        Ok(SimState::new(u))
    }

    fn reaction(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|&v| self.spec.f(v)).collect()
    }

    /// One IMEX step.
    pub fn step(&self, state: &mut SimState) -> Result<(), SimError> {
        let dt = self.config.dt;
        let f_now = self.reaction(&state.u);
        let fx: Vec<f64> = match &state.f_prev {
            Some(fp) => f_now.iter().zip(fp).map(|(a, b)| match self.config.scheme {
                Scheme::ImexCnAb2 => 1.5 * a - 0.5 * b,
                Scheme::ImexBdf2 => 2.0 * a - b,
            })
            .collect(),
            None => f_now.clone(),
        };
        let new_u = match (self.config.scheme, &state.u_prev) {
            (Scheme::ImexCnAb2, _) => {
                let au = self.a.matvec(&state.u);
                let rhs: Vec<f64> = (0..state.u.len()).map(|i| state.u[i] + 0.5 * dt * au[i] + dt * (self.g[i] + fx[i])).collect();
                self.lu_main.solve(&rhs)
            }
            (Scheme::ImexBdf2, Some(up)) if state.f_prev.is_some() => {
                let rhs: Vec<f64> = (0..state.u.len()).map(|i| 2.0 * state.u[i] - 0.5 * up[i] + dt * (self.g[i] + fx[i])).collect();
                self.lu_main.solve(&rhs)
            }
            (Scheme::ImexBdf2, _) => {
                let rhs: Vec<f64> = (0..state.u.len()).map(|i| state.u[i] + dt * (self.g[i] + fx[i])).collect();
                self.lu_start.as_ref().expect("BDF2 start factor").solve(&rhs)
            }
        };
        let mut new_u = new_u;
        // far-field values would otherwise go subnormal, which is very slow
        for v in new_u.iter_mut() {
            if v.abs() < 1e-200 {
                *v = 0.0;
            }
        }
        state.steps += 1;
        state.t = state.steps as f64 * dt;
        let norm = new_u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm > 10.0 || (state.steps.is_multiple_of(100) && new_u.iter().any(|v| !v.is_finite())) || !norm.is_finite() {
            return Err(SimError::BlowUp { t: state.t, norm });
        }
        if self.config.scheme == Scheme::ImexBdf2 {
            state.u_prev = Some(std::mem::replace(&mut state.u, new_u));
        } else {
            state.u = new_u;
        }
        state.f_prev = Some(f_now);
        Ok(())
    }

    /// Integrate to `t` (rounded to whole steps).
    pub fn advance_to(&self, state: &mut SimState, t: f64) -> Result<(), SimError> {
        let target = (t / self.config.dt).round() as usize;
        while state.steps < target {
            self.step(state).map_err(|e| SimError::AtTime { t: state.t, source: Box::new(e) })?;
        }
        Ok(())
    }
}

/// Rightmost downward crossing of `level`, linearly interpolated.
pub fn front_position(grid: &UniformGrid, u: &[f64], level: f64) -> Result<f64, SimError> {
    for i in (0..u.len() - 1).rev() {
        if u[i] >= level && u[i + 1] < level {
            let s = (u[i] - level) / (u[i] - u[i + 1]);
            return Ok(grid.x(i) + s * grid.h());
        }
    }
    Err(SimError::NoCrossing(level))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvasionRun {
    /// `(t, σ(t))`.
    pub series: Vec<(f64, f64)>,
    pub checkpoints: Vec<SimState>,
    pub final_state: SimState,
    /// Largest `dt·|f′(u)|` met.
    pub max_stiffness: f64,
    pub warnings: Vec<String>,
}

/// Integrate and sample the front position at the configured times.
pub fn run_invasion(spec: &ModelSpec, config: &SimConfig, front: Option<&FrontProfile>) -> Result<InvasionRun, SimError> {
    let sim = Simulator::new(spec, config)?;
    let mut state = sim.initial_state(front)?;
    let level = config.level.unwrap_or(spec.u_minus / 2.0);
    let mut times: Vec<f64> = if config.sample_times.is_empty() {
        (0..=config.t_final.floor() as usize).map(|k| k as f64).collect()
    } else {
        config.sample_times.iter().copied().filter(|&t| t <= config.t_final + 1e-12).collect()
    };
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut checkpoints_left: Vec<f64> = config.checkpoint_times.clone();
    checkpoints_left.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut series = Vec::with_capacity(times.len());
    let mut checkpoints = Vec::new();
    let mut warnings = Vec::new();
    let mut max_stiffness = 0.0f64;
    let mut warned_range = false;
    let mut events: Vec<(f64, bool)> = times.iter().map(|&t| (t, true)).chain(checkpoints_left.iter().map(|&t| (t, false))).collect();
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (t, is_sample) in events {
        sim.advance_to(&mut state, t)?;
        max_stiffness = max_stiffness.max(config.dt * state.u.iter().map(|&v| spec.df(v).abs()).fold(0.0, f64::max));
        if !warned_range && state.u.iter().any(|&v| v < -0.5 || v > 1.5 * spec.u_minus.abs().max(1e-12)) {
            warned_range = true;
            let msg = format!("u left [-0.5, 1.5 u_minus] at t = {}", state.t);
            tracing::warn!("{msg}");
            warnings.push(msg);
        }
        if is_sample {
            let x = front_position(&sim.grid, &state.u, level).map_err(|e| SimError::AtTime { t: state.t, source: Box::new(e) })?;
            series.push((state.t, x));
        } else {
            checkpoints.push(state.clone());
        }
    }
    sim.advance_to(&mut state, config.t_final)?;
    if max_stiffness > 0.5 {
        let msg = format!("dt·max|f'| = {max_stiffness:.3} exceeds 0.5");
        tracing::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(InvasionRun { series, checkpoints, final_state: state, max_stiffness, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftFit {
    pub c_fit: f64,
    pub b_fit: f64,
    pub x_inf: f64,
    pub window: (f64, f64),
    pub residual_rms: f64,
    /// Slope of Δ(σ − c_fit t) against Δ log t.
    pub b_diff: f64,
    pub condition: f64,
    pub samples: usize,
}

pub const FIT_CONDITION_MAX: f64 = 1e10;

/// Least squares of σ(t) against (t, log t, 1) over `window`.
pub fn fit_log_shift(series: &[(f64, f64)], window: (f64, f64)) -> Result<ShiftFit, SimError> {
    let pts: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= window.0 && t <= window.1).collect();
    if pts.len() < 30 || window.0 < 50.0 {
        return Err(SimError::BadWindow { start: window.0, end: window.1, count: pts.len() });
    }
    let cols_raw = [pts.iter().map(|p| p.0).collect::<Vec<_>>(), pts.iter().map(|p| p.0.ln()).collect(), vec![1.0; pts.len()]];
    let scales: Vec<f64> = cols_raw.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let cols: Vec<Vec<f64>> = cols_raw.iter().zip(&scales).map(|(c, s)| c.iter().map(|v| v / s).collect()).collect();
    let b: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (x, cond) = lstsq(&cols, &b).ok_or(SimError::IllConditioned(f64::INFINITY))?;
    if !(cond < FIT_CONDITION_MAX) {
        return Err(SimError::IllConditioned(cond));
    }
    let (c, bb, x0) = (x[0] / scales[0], x[1] / scales[1], x[2] / scales[2]);
    let rms = (pts.iter().map(|&(t, s)| (s - c * t - bb * t.ln() - x0).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    let (mut num, mut den) = (0.0, 0.0);
    for w in pts.windows(2) {
        let dl = w[1].0.ln() - w[0].0.ln();
        let dy = (w[1].1 - c * w[1].0) - (w[0].1 - c * w[0].0);
        num += dl * dy;
        den += dl * dl;
    }
    Ok(ShiftFit { c_fit: c, b_fit: bb, x_inf: x0, window, residual_rms: rms, b_diff: num / den, condition: cond, samples: pts.len() })
}

/// `sup ρ_{−1}(x) ω(x) |u(x + shift) − q*(x)|` over the front grid points whose
/// shifted location lies in the simulation domain. q* is taken in the phase frame.
pub fn weighted_perturbation_norm(grid: &UniformGrid, u: &[f64], front: &FrontProfile, weights: &Weights, shift: f64) -> f64 {
    let fg = front.phase_grid();
    let mut best = 0.0f64;
    for x in fg.xs() {
        let y = x + shift;
        if y < grid.x0 || y > grid.x1 {
            continue;
        }
        let d = cubic(grid, u, y) - front.eval_phase(x);
        best = best.max(weights.rho(-1.0, x) * weights.omega(x) * d.abs());
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProblemSettings {
    pub t_shift: f64,
    pub t_final: f64,
    pub n: usize,
    pub dt: f64,
    /// Drop the `3/(2(t+T))` terms (pure heat equation).
    pub autonomous: bool,
    /// Half-line length; defaults to 20√(t_final + T).
    pub length: Option<f64>,
    /// Rows are recorded every `record_every` steps.
    pub record_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub t: f64,
    pub w_sup: f64,
    /// `(t+T)^{3/2} ‖z‖∞`.
    pub z_scaled: f64,
    /// `max |w − (t+T)^{3/2} z|`.
    pub identity_error: f64,
    /// `sup |w| / ⟨x⟩`.
    pub w_weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProblemRun {
    pub settings: ModelProblemSettings,
    pub rows: Vec<ModelRow>,
    pub identity_error_max: f64,
}

fn bump(x: f64) -> f64 {
    let s = x - 2.0;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Crank–Nicolson for `w_t = w_xx − k(t)(w_x − w)` and `z_t = z_xx − k(t) z_x`,
/// `k = 3/(2(t+T))`, on [0, L] with Dirichlet ends. The zeroth-order term `k w`
/// is integrated exactly: each w step is the z step times `((t₁+T)/(t₀+T))^{3/2}`.
pub fn model_problem_run(settings: &ModelProblemSettings) -> Result<ModelProblemRun, SimError> {
    let ModelProblemSettings { t_shift, t_final, n, dt, autonomous, .. } = *settings;
    if n < 8 || !(dt > 0.0) || !(t_shift > 0.0) || !(t_final >= 0.0) {
        return Err(SimError::BadConfig(format!("n = {n}, dt = {dt}, T = {t_shift}")));
    }
    let length = settings.length.unwrap_or(20.0 * (t_final + t_shift).sqrt());
    let grid = UniformGrid::new(0.0, length, n);
    let h = grid.h();
    let xs = grid.xs();
    let m = n - 2;
    let mut w: Vec<f64> = xs[1..n - 1].iter().map(|&x| bump(x)).collect();
    let mut z: Vec<f64> = w.iter().map(|v| v * t_shift.powf(-1.5)).collect();
    let kfun = |t: f64| if autonomous { 0.0 } else { 1.5 / (t + t_shift) };
    // one CN step of u_t = u'' − k u'
    let cn_step = |u: &[f64], k0: f64, k1: f64| -> Result<Vec<f64>, SimError> {
        let mut rhs: Vec<f64> = (0..m)
            .map(|i| {
                let l = if i > 0 { u[i - 1] } else { 0.0 };
                let r = if i + 1 < m { u[i + 1] } else { 0.0 };
                u[i] + 0.5 * dt * ((l - 2.0 * u[i] + r) / (h * h) - k0 * (r - l) / (2.0 * h))
            })
            .collect();
        // tridiagonal elimination; diagonally dominant for k h < 2
        let lo = -0.5 * dt * (1.0 / (h * h) + k1 / (2.0 * h));
        let up = -0.5 * dt * (1.0 / (h * h) - k1 / (2.0 * h));
        let di = 1.0 + dt / (h * h);
        let mut cp = vec![0.0; m];
        let mut piv = di;
        for i in 0..m {
            if i > 0 {
                piv = di - lo * cp[i - 1];
                rhs[i] -= lo * rhs[i - 1];
            }
            if piv.abs() < 1e-300 {
                return Err(SimError::LinearSolveFailure(format!("zero pivot at row {i}")));
            }
            cp[i] = up / piv;
            rhs[i] /= piv;
        }
        for i in (0..m - 1).rev() {
            rhs[i] -= cp[i] * rhs[i + 1];
        }
        Ok(rhs)
    };
    let identity = |t: f64, w: &[f64], z: &[f64]| {
        let s = (t + t_shift).powf(1.5);
        w.iter().zip(z).map(|(a, b)| (a - s * b).abs()).fold(0.0, f64::max)
    };
    let record = |t: f64, w: &[f64], z: &[f64]| ModelRow {
        t,
        w_sup: w.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        z_scaled: (t + t_shift).powf(1.5) * z.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        identity_error: identity(t, w, z),
        w_weighted: w.iter().zip(&xs[1..]).map(|(v, x)| v.abs() / (1.0 + x * x).sqrt()).fold(0.0, f64::max),
    };
    let steps = (t_final / dt).round() as usize;
    let every = settings.record_every.max(1);
    let mut rows = vec![record(0.0, &w, &z)];
    let mut identity_error_max = 0.0f64;
    for s in 0..steps {
        let (t0, t1) = (s as f64 * dt, (s + 1) as f64 * dt);
        let (k0, k1) = (kfun(t0), kfun(t1));
        let growth = if autonomous { 1.0 } else { ((t1 + t_shift) / (t0 + t_shift)).powf(1.5) };
        w = cn_step(&w, k0, k1)?;
        w.iter_mut().for_each(|v| *v *= growth);
        z = cn_step(&z, k0, k1)?;
        if !autonomous {
            identity_error_max = identity_error_max.max(identity(t1, &w, &z));
        }
        if (s + 1) % every == 0 || s + 1 == steps {
            rows.push(record(t1, &w, &z));
        }
    }
    if autonomous {
        identity_error_max = f64::NAN;
    }
    Ok(ModelProblemRun { settings: settings.clone(), rows, identity_error_max })
}

//! The five analysis pipelines. Each writes its artifacts as it goes, so a
//! failure part way through leaves the earlier files in place.

use rayon::prelude::*;
use serde::Serialize;

use frontlab::approx::{
    build_approx, default_t_samples, derivative_matching_rate, residual_decay_check, zeta_envelope, ApproxError, Interior, PsiSample,
};
use frontlab::config::{ConfigError, InitialKind, InteriorKind, RunConfig};
use frontlab::dispersion::{
    check_hypotheses, continuation_sweep, envelope_speed_oracle, find_pinched_double_root, symmetric_k_grid, verify_pinching, DispersionError,
    Offender, SweepMode,
};
use frontlab::front::{allow_wrong_tail_sign, front_continuation, solve_front_with, FrontError, FrontOptions};
use frontlab::simulator::{fit_log_shift, model_problem_run, run_invasion, weighted_perturbation_norm, ModelRow, SimError};
use frontlab::spectrum::{
    eigenvalue_scan_seeded, essential_spectrum_curves, prepare_operator, pushed_pulled_transition, Branch, Classification, SpectrumError,
};
use frontlab::weights::Weights;
use frontlab::{approx::loglog_fit, FrontProfile, ModelSpec, PinchResult};

use crate::artifacts::{ArtifactError, Artifacts};
use crate::manifest::Check;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<DispersionError> for Failure {
    fn from(e: DispersionError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

fn front_is_config(e: &FrontError) -> bool {
    match e {
        FrontError::BadDomain(..) | FrontError::TooFewPoints { .. } | FrontError::BadWindow(..) => true,
        FrontError::AtParameter { source, .. } => front_is_config(source),
        _ => false,
    }
}

impl From<FrontError> for Failure {
    fn from(e: FrontError) -> Self {
        if front_is_config(&e) {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<SpectrumError> for Failure {
    fn from(e: SpectrumError) -> Self {
        fn is_config(e: &SpectrumError) -> bool {
            match e {
                SpectrumError::GridTooCoarse { .. } | SpectrumError::NoSignChange(..) => true,
                SpectrumError::Front(f) => front_is_config(f),
                SpectrumError::AtParameter { source, .. } => is_config(source),
                _ => false,
            }
        }
        if is_config(&e) {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<ApproxError> for Failure {
    fn from(e: ApproxError) -> Self {
        match e {
            ApproxError::BadParameter(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        fn is_config(e: &SimError) -> bool {
            match e {
                SimError::BadConfig(_) | SimError::BadWindow { .. } => true,
                SimError::AtTime { source, .. } => is_config(source),
                _ => false,
            }
        }
        if is_config(&e) {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<ArtifactError> for Failure {
    fn from(e: ArtifactError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

pub struct Ctx<'a> {
    pub config: &'a RunConfig,
    pub spec: ModelSpec,
    pub out: &'a mut Artifacts,
    pub warnings: Vec<String>,
}

pub type Outcome = Result<Vec<Check>, Failure>;

fn pinch_for(ctx: &Ctx) -> Result<PinchResult, Failure> {
    let mut r = find_pinched_double_root(&ctx.spec)?;
    if let Some(lm) = ctx.config.dispersion.lambda_max {
        r.certificate = verify_pinching(&ctx.spec, &r, lm)?;
    }
    Ok(r)
}

fn front_options(ctx: &Ctx) -> FrontOptions {
    FrontOptions { window: ctx.config.front.window, exact_tail: ctx.config.front.exact_tail, ..Default::default() }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Plus => "plus",
        Branch::Minus => "minus",
    }
}

// ---------------------------------------------------------------- speed

#[derive(Serialize)]
struct HypothesisSummary {
    hyp1_ii_ok: bool,
    hyp1_iii_ok: bool,
    hyp2_ok: bool,
    hyp1_ii_worst: Offender,
    hyp1_iii_worst: Offender,
    hyp2_worst: Offender,
    k_max: f64,
    n_k: usize,
}

#[derive(Serialize)]
struct SpeedResult {
    spec: ModelSpec,
    c_star: f64,
    eta_star: f64,
    alpha: f64,
    lambda_dr: (f64, f64),
    residual_d: f64,
    residual_dnu: f64,
    morse_counts: (usize, usize),
    pinched: bool,
    hypotheses: HypothesisSummary,
    oracle: Option<(f64, f64)>,
}

pub fn speed(ctx: &mut Ctx) -> Outcome {
    let sec = &ctx.config.dispersion;
    let r = pinch_for(ctx)?;
    let rep = check_hypotheses(&ctx.spec, &r, sec.k_max, sec.n_k);
    let oracle = envelope_speed_oracle(&ctx.spec);
    let mut checks = vec![
        Check::new("pinched", r.certificate.is_pinched(ctx.spec.order_half), format!("morse counts {:?}", r.certificate.morse_counts)),
        Check::new("double_root_residual", r.residual_d < 1e-10 && r.residual_dnu < 1e-10, format!("|d| = {:.1e}, |d_nu| = {:.1e}", r.residual_d, r.residual_dnu)),
        Check::new("hypothesis_1", rep.hyp1_ii_ok && rep.hyp1_iii_ok, format!("worst Re λ⁺ = {:.3e} at k = {}", rep.hyp1_iii_worst.re_lambda, rep.hyp1_iii_worst.k)),
        Check::new("hypothesis_2", rep.hyp2_ok, format!("worst Re λ⁻ = {:.3e} at k = {}", rep.hyp2_worst.re_lambda, rep.hyp2_worst.k)),
    ];
    checks.push(match &oracle {
        Ok((c, eta)) => {
            let d = (c - r.c_star).abs().max((eta - r.eta_star).abs());
            Check::new("oracle", d < 1e-8, format!("max deviation {d:.1e}"))
        }
        Err(e) => Check::skipped("oracle", format!("not applicable: {e}")),
    });
    ctx.out.json(
        "speed.json",
        &SpeedResult {
            spec: ctx.spec.clone(),
            c_star: r.c_star,
            eta_star: r.eta_star,
            alpha: r.alpha,
            lambda_dr: (r.lambda_dr.re, r.lambda_dr.im),
            residual_d: r.residual_d,
            residual_dnu: r.residual_dnu,
            morse_counts: r.certificate.morse_counts,
            pinched: r.certificate.is_pinched(ctx.spec.order_half),
            hypotheses: HypothesisSummary {
                hyp1_ii_ok: rep.hyp1_ii_ok,
                hyp1_iii_ok: rep.hyp1_iii_ok,
                hyp2_ok: rep.hyp2_ok,
                hyp1_ii_worst: rep.hyp1_ii_worst.clone(),
                hyp1_iii_worst: rep.hyp1_iii_worst.clone(),
                hyp2_worst: rep.hyp2_worst.clone(),
                k_max: sec.k_max,
                n_k: sec.n_k,
            },
            oracle: oracle.ok(),
        },
    )?;
    let curves = essential_spectrum_curves(&ctx.spec, &r, &symmetric_k_grid(sec.k_max, sec.n_k));
    ctx.out.csv("spectrum_curves.csv", &["branch", "k", "re", "im"], curves.iter().map(|p| (branch_name(p.branch), p.k, p.re, p.im)))?;
    let tracks = r.certificate.root_tracks.iter().flat_map(|tp| tp.roots.iter().enumerate().map(move |(j, z)| (tp.lambda, tp.lambda_im, j, z.re, z.im)));
    ctx.out.csv("root_tracks.csv", &["lambda", "lambda_im", "track", "re", "im"], tracks)?;
    if !sec.sweep.is_empty() {
        let rows = continuation_sweep(&ctx.config.model.family()?, &sec.sweep, SweepMode::ParallelColdStart)?;
        ctx.out.csv(
            "sweep.csv",
            &["delta", "c_star", "eta_star", "alpha", "hypotheses_ok"],
            rows.iter().map(|(s, _)| (s.delta, s.c_star, s.eta_star, s.alpha, s.hypotheses_ok)),
        )?;
    }
    Ok(checks)
}

// ---------------------------------------------------------------- front

#[derive(Serialize)]
struct FrontResult {
    c: f64,
    eta_star: f64,
    a: f64,
    b: f64,
    a_raw: f64,
    b_raw: f64,
    phase_shift: f64,
    residual_norm: f64,
    eta_fit: f64,
    eta0_fit: Option<f64>,
    newton_iterations: usize,
    domain: (f64, f64),
    n: usize,
}

fn write_front(out: &mut Artifacts, p: &FrontProfile) -> Result<(), ArtifactError> {
    out.json(
        "front.json",
        &FrontResult {
            c: p.c,
            eta_star: p.eta_star,
            a: p.a_coeff,
            b: p.b_coeff,
            a_raw: p.a_raw,
            b_raw: p.b_raw,
            phase_shift: p.phase_shift,
            residual_norm: p.residual_norm,
            eta_fit: p.eta_fit,
            eta0_fit: p.eta0_fit,
            newton_iterations: p.newton_iterations,
            domain: (p.grid.x0 + p.phase_shift, p.grid.x1 + p.phase_shift),
            n: p.grid.n,
        },
    )?;
    let xs = p.xs();
    out.csv("front_profile.csv", &["x", "x_phase", "q"], xs.iter().zip(&p.q).map(|(&x, &q)| (x, x + p.phase_shift, q)))
}

pub fn front(ctx: &mut Ctx) -> Outcome {
    let sec = &ctx.config.front;
    let r = pinch_for(ctx)?;
    let (profile, sign_ok) = match solve_front_with(&ctx.spec, &r, sec.domain, sec.n, &front_options(ctx)) {
        Ok(p) => (p, true),
        Err(FrontError::WrongTailSign(p)) => (*p, false),
        Err(e) => return Err(e.into()),
    };
    write_front(ctx.out, &profile)?;
    let mut checks = vec![
        Check::new("residual", profile.residual_norm < 1e-8, format!("{:.2e} (tol 1e-8)", profile.residual_norm)),
        Check::new("eta_fit", (profile.eta_fit - r.eta_star).abs() < 1e-3, format!("{:.6} vs η* = {:.6}", profile.eta_fit, r.eta_star)),
        Check::new("tail_sign", sign_ok, if sign_ok { "b > 0".to_string() } else { "b < 0: pushed regime, profile reported with b = -1".into() }),
    ];
    if !sec.continuation.is_empty() {
        let family = ctx.config.model.family()?;
        let pinches: Vec<PinchResult> =
            continuation_sweep(&family, &sec.continuation, SweepMode::ParallelColdStart)?.into_iter().map(|(_, p)| p).collect();
        let rows = front_continuation(&family, &sec.continuation, &pinches, sec.domain, sec.n)?;
        ctx.out.csv("continuation.csv", &["delta", "a", "b_raw", "residual"], rows.iter().map(|(c, _)| (c.delta, c.a, c.b_raw, c.residual)))?;
        let worst = rows.iter().map(|(c, _)| c.residual).fold(0.0, f64::max);
        checks.push(Check::new("continuation_residual", worst < 1e-8, format!("max residual {worst:.2e} over {} values", rows.len())));
    }
    Ok(checks)
}

// ---------------------------------------------------------------- spectrum

#[derive(Serialize)]
struct Transition {
    bracket: (f64, f64),
    delta_crit: f64,
}

pub fn spectrum(ctx: &mut Ctx, seed: u64) -> Outcome {
    let sec = &ctx.config.spectrum;
    let settings = sec.settings();
    let op = prepare_operator(&ctx.spec, &settings)?;
    let rep = eigenvalue_scan_seeded(&op, sec.margin, seed)?;
    ctx.out.json("spectrum.json", &rep)?;
    let class = |c: Classification| match c {
        Classification::PointSpectrum => "point",
        Classification::EssentialArtifact => "artifact",
    };
    ctx.out.csv(
        "eigenvalues.csv",
        &["re", "im", "score", "classification", "enlargement_shift"],
        rep.candidates.iter().map(|c| (c.re, c.im, c.score, class(c.classification), c.enlargement_shift)),
    )?;
    let unstable = rep.unstable_point_spectrum();
    let detail = match (unstable.is_empty(), rep.resonance_value) {
        (true, Some(e)) => format!("no unstable point spectrum; E(0) = {:.4e}", e.0),
        (true, None) => "no unstable point spectrum".to_string(),
        (false, _) => format!(
            "unstable eigenvalue(s): {}",
            unstable.iter().map(|c| format!("{:.6}{:+.6}i", c.re, c.im)).collect::<Vec<_>>().join(", ")
        ),
    };
    let mut checks = vec![Check::new("hypothesis_4", rep.verdict, detail)];
    if let Some(bracket) = sec.transition {
        let family = ctx.config.model.family()?;
        let tr = pushed_pulled_transition(&family, bracket, &settings)?;
        ctx.out.csv("transition.csv", &["delta", "e0"], tr.evaluations.iter().copied())?;
        ctx.out.json("transition.json", &Transition { bracket, delta_crit: tr.delta_crit })?;
        checks.push(Check::new("transition", true, format!("δ_crit = {:.4}", tr.delta_crit)));
    }
    if !sec.sweep.is_empty() {
        let family = ctx.config.model.family()?;
        let rows = sec
            .sweep
            .par_iter()
            .map(|&d| -> Result<(f64, f64, usize, bool), SpectrumError> {
                let wrap = |e| SpectrumError::AtParameter { delta: d, source: Box::new(e) };
                let op = prepare_operator(&family.at(d), &settings).map_err(wrap)?;
                let rep = eigenvalue_scan_seeded(&op, sec.margin, seed).map_err(wrap)?;
                Ok((d, rep.resonance_value.map_or(f64::NAN, |e| e.0), rep.unstable_point_spectrum().len(), rep.verdict))
            })
            .collect::<Result<Vec<_>, _>>()?;
        ctx.out.csv("sweep.csv", &["delta", "e0", "unstable", "verdict"], rows)?;
    }
    Ok(checks)
}

// ---------------------------------------------------------------- approx

#[derive(Serialize)]
struct ApproxResult {
    t_shift: f64,
    mu: f64,
    x0: f64,
    a: f64,
    alpha: f64,
    alpha3: f64,
    eta_star: f64,
    c_star: f64,
    beta0: f64,
    decay_exponent: Option<f64>,
    decay_bounded: Option<bool>,
    zeta_fit: Option<(f64, f64)>,
    matching_slope: Option<f64>,
}

pub fn approx(ctx: &mut Ctx) -> Outcome {
    let sec = &ctx.config.approx;
    let r = pinch_for(ctx)?;
    let profile = allow_wrong_tail_sign(solve_front_with(&ctx.spec, &r, ctx.config.front.domain, ctx.config.front.n, &front_options(ctx)))?;
    let a = profile.a_coeff;
    let weights = Weights::new(r.eta_star, ctx.spec.order_half);
    let interior = match sec.interior {
        InteriorKind::Front => Interior::from_front(&profile, &weights),
        InteriorKind::ExactTail => Interior::ExactTail { a },
    };
    let settings = sec.settings(a);
    let mut ap = build_approx(&ctx.spec, &r, interior, &settings)?;
    let mut result = ApproxResult {
        t_shift: ap.t_shift,
        mu: ap.mu,
        x0: ap.x0,
        a,
        alpha: ap.alpha,
        alpha3: ap.alpha3,
        eta_star: ap.eta_star,
        c_star: ap.c_star,
        beta0: ap.profiles.beta0,
        decay_exponent: None,
        decay_bounded: None,
        zeta_fit: None,
        matching_slope: None,
    };
    ctx.out.json("approx.json", &result)?;
    let prof = &ap.profiles;
    ctx.out.csv("self_similar.csv", &["xi", "psi0", "psi1"], prof.xi_grid.xs().into_iter().zip(&prof.psi0).zip(&prof.psi1).map(|((x, p0), p1)| (x, p0, p1)))?;

    // the matching-rate study uses the exact tail with the same offset
    let base = build_approx(&ctx.spec, &r, Interior::ExactTail { a }, &sec.settings(a))?;
    let (mismatch, (_, slope)) = derivative_matching_rate(&base, &sec.rate_t)?;
    ctx.out.csv("matching_rate.csv", &["T", "mismatch"], sec.rate_t.iter().zip(&mismatch))?;
    result.matching_slope = Some(slope);
    let mut checks = vec![Check::new("matching_rate", (slope + 0.5).abs() <= 0.1, format!("slope {slope:.3} (−0.5 ± 0.1)"))];

    let ts = default_t_samples(sec.t_shift, sec.samples);
    let t_max = ts.last().copied().unwrap_or(0.0);
    ap.tabulate_zeta(t_max.max(1.0), 2 * sec.samples.max(2))?;
    ctx.out.csv("zeta.csv", &["t", "zeta"], ap.zeta_table.iter().copied())?;
    let grid = ap.default_grid(0.0);
    let samples: Vec<PsiSample> = {
        let z = ap.zeta(0.0)?;
        grid.xs().iter().step_by(5).map(|&x| ap.sample(x, 0.0, z)).collect()
    };
    ctx.out.csv("psi_t0.csv", &["x", "psi", "psi_minus", "psi_plus", "chi"], samples.iter().map(|s| (s.x, s.psi, s.psi_minus, s.psi_plus, s.chi)))?;

    let env = zeta_envelope(&ap, &ts)?;
    result.zeta_fit = Some((env.c_fit, env.exponent));
    checks.push(Check::new("zeta_envelope", env.holds, format!("|ζ| ~ (t+T)^{:.3}; bound exponent μ − 1/2 + 0.2 = {:.3}", env.exponent, ap.mu - 0.3)));
    let table = residual_decay_check(&ap, &ts)?;
    ctx.out.csv("decay_table.csv", &["t", "norm", "scaled", "l1"], table.rows.iter().map(|r| (r.t, r.norm, r.scaled, r.l1)))?;
    result.decay_exponent = Some(table.exponent);
    result.decay_bounded = Some(table.passed);
    let (lo, hi) = table.rows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.scaled), b.max(r.scaled)));
    checks.push(Check::new("residual_decay", table.passed, format!("scaled column in [{lo:.3e}, {hi:.3e}] (factor-2 rule)")));
    ctx.out.json("approx.json", &result)?;
    Ok(checks)
}

// ---------------------------------------------------------------- simulate

#[derive(Serialize)]
struct SimulateResult {
    c_star: f64,
    eta_star: f64,
    b_target: f64,
    samples: usize,
    final_position: Option<f64>,
    fit: Option<frontlab::ShiftFit>,
    b_ratio: Option<f64>,
    max_stiffness: f64,
    dt: f64,
    n: usize,
    domain: (f64, f64),
}

pub fn simulate(ctx: &mut Ctx) -> Outcome {
    let sec = &ctx.config.simulate;
    let r = pinch_for(ctx)?;
    let mut cfg = sec.sim_config(&ctx.spec)?;
    let window = sec.window();
    let fit_wanted = window.0 >= 50.0 && sec.t_final >= window.1;
    let norm_times: Vec<f64> = if !sec.checkpoints.is_empty() {
        sec.checkpoints.clone()
    } else if fit_wanted {
        (0..8).map(|k| (window.0 + k as f64 * (window.1 - window.0) / 7.0).round()).collect()
    } else {
        Vec::new()
    };
    cfg.checkpoint_times = norm_times.clone();
    let needs_front = sec.initial == InitialKind::Front || !norm_times.is_empty();
    let profile = if needs_front {
        let p = solve_front_with(&ctx.spec, &r, ctx.config.front.domain, ctx.config.front.n, &front_options(ctx));
        Some(allow_wrong_tail_sign(p)?)
    } else {
        None
    };
    let run = run_invasion(&ctx.spec, &cfg, profile.as_ref())?;
    ctx.warnings.extend(run.warnings.iter().cloned());
    ctx.out.csv("position.csv", &["t", "sigma", "sigma_minus_c_star_t"], run.series.iter().map(|&(t, s)| (t, s, s - r.c_star * t)))?;

    let b_target = -1.5 / r.eta_star;
    let mut checks = Vec::new();
    let fit = if fit_wanted {
        let f = fit_log_shift(&run.series, window)?;
        let ratio = f.b_fit / b_target;
        checks.push(Check::new("bramson_ratio", (0.85..=1.15).contains(&ratio), format!("B_fit = {:.4}, ratio to {b_target:.4} = {ratio:.3} ([0.85, 1.15])", f.b_fit)));
        checks.push(Check::new("speed", (f.c_fit - r.c_star).abs() <= 0.01 * r.c_star, format!("c_fit = {:.5} vs c* = {:.5}", f.c_fit, r.c_star)));
        Some(f)
    } else {
        checks.push(Check::skipped("bramson_ratio", format!("fit window [{}, {}] needs start ≥ 50 and t_final ≥ end", window.0, window.1)));
        None
    };
    if sec.initial == InitialKind::Front {
        let s0 = run.series.first().map_or(0.0, |p| p.1);
        let drift = run.series.iter().map(|&(t, s)| (s - s0 - r.c_star * t).abs()).fold(0.0, f64::max);
        checks.push(Check::new("rigid_propagation", drift <= 0.05, format!("max |σ(t) − σ(0) − c* t| = {drift:.2e} (tol 0.05)")));
    }
    if let (Some(p), false) = (&profile, run.checkpoints.is_empty()) {
        let grid = cfg.grid();
        let w = Weights::new(r.eta_star, ctx.spec.order_half);
        let rows: Vec<(f64, f64, f64)> = run
            .checkpoints
            .iter()
            .map(|st| {
                let shift = match &fit {
                    Some(f) if st.t > 0.0 => f.c_fit * st.t + f.b_fit * st.t.ln() + f.x_inf,
                    _ => run.series.iter().find(|s| (s.0 - st.t).abs() < 1e-9).map_or(r.c_star * st.t, |s| s.1),
                };
                (st.t, shift, weighted_perturbation_norm(&grid, &st.u, p, &w, shift))
            })
            .collect();
        ctx.out.csv("weighted_norm.csv", &["t", "shift", "norm"], rows)?;
    }
    if !sec.checkpoints.is_empty() {
        let xs = cfg.grid().xs();
        for st in &run.checkpoints {
            ctx.out.csv(&format!("profile_t{}.csv", st.t), &["x", "u"], xs.iter().zip(&st.u))?;
        }
    }
    let final_position = run.series.last().map(|s| s.1);
    ctx.out.json(
        "simulate.json",
        &SimulateResult {
            c_star: r.c_star,
            eta_star: r.eta_star,
            b_target,
            samples: run.series.len(),
            final_position,
            b_ratio: fit.as_ref().map(|f| f.b_fit / b_target),
            fit,
            max_stiffness: run.max_stiffness,
            dt: cfg.dt,
            n: cfg.n,
            domain: cfg.domain,
        },
    )?;
    Ok(checks)
}

#[derive(Serialize)]
struct ModelProblemResult {
    t_shift: f64,
    t_final: f64,
    identity_error_max: f64,
    band: (f64, f64),
    autonomous_exponent: f64,
}

pub fn model_problem(ctx: &mut Ctx) -> Outcome {
    let sec = &ctx.config.simulate.model_problem;
    let s = sec.settings(false);
    let header = ["t", "w_sup", "z_scaled", "identity_error", "w_weighted"];
    let row = |r: &ModelRow| (r.t, r.w_sup, r.z_scaled, r.identity_error, r.w_weighted);
    let run = model_problem_run(&s)?;
    ctx.out.csv("model_problem.csv", &header, run.rows.iter().map(row))?;
    let heat = model_problem_run(&sec.settings(true))?;
    ctx.out.csv("model_problem_autonomous.csv", &header, heat.rows.iter().map(row))?;
    let tt = s.t_shift;
    let after: Vec<&ModelRow> = run.rows.iter().filter(|r| r.t >= tt).collect();
    let w0 = after.first().map(|r| r.w_sup).ok_or_else(|| Failure::Config("t_final must be at least T".into()))?;
    let (lo, hi) = after.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.w_sup / w0), b.max(r.w_sup / w0)));
    let pts: Vec<&ModelRow> = heat.rows.iter().filter(|r| r.t >= tt).collect();
    let (_, p) = loglog_fit(&pts.iter().map(|r| r.t).collect::<Vec<_>>(), &pts.iter().map(|r| r.w_weighted).collect::<Vec<_>>());
    ctx.out.json(
        "model_problem.json",
        &ModelProblemResult { t_shift: tt, t_final: s.t_final, identity_error_max: run.identity_error_max, band: (lo, hi), autonomous_exponent: p },
    )?;
    Ok(vec![
        Check::new("identity", run.identity_error_max < 1e-8, format!("max |w − (t+T)^{{3/2}} z| = {:.1e}", run.identity_error_max)),
        Check::new("bounded", lo >= 0.2 && hi <= 5.0, format!("‖w(t)‖/‖w(T)‖ in [{lo:.3}, {hi:.3}] (band [0.2, 5])")),
        Check::new("autonomous_decay", (p + 1.5).abs() <= 0.1, format!("weighted-norm exponent {p:.3} (−1.5 ± 0.1)")),
    ])
}

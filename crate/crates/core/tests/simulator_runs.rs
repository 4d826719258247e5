use frontlab::dispersion::find_pinched_double_root;
use frontlab::front::solve_front;
use frontlab::simulator::{run_invasion, weighted_perturbation_norm, InitialData, Scheme, SimConfig, SimState, Simulator};
use frontlab::weights::Weights;
use frontlab::ModelSpec;

fn smooth_front_table(cfg: &SimConfig) -> InitialData {
    let x = cfg.grid().xs();
    let u = x.iter().map(|&v| 0.5 * (1.0 - (0.7 * v).tanh())).collect();
    InitialData::Table { x, u }
}

fn run_to_one(scheme: Scheme, dt: f64) -> Vec<f64> {
    let spec = ModelSpec::fkpp();
    let mut cfg = SimConfig::new((-20.0, 40.0), 1201, dt, 1.0);
    cfg.scheme = scheme;
    cfg.initial = smooth_front_table(&cfg);
    let sim = Simulator::new(&spec, &cfg).unwrap();
    let mut st: SimState = sim.initial_state(None).unwrap();
    sim.advance_to(&mut st, 1.0).unwrap();
    st.u
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn both_schemes_are_second_order_in_time() {
    for scheme in [Scheme::ImexCnAb2, Scheme::ImexBdf2] {
        let reference = run_to_one(scheme, 1.0 / 1024.0);
        let errs: Vec<f64> = [16.0, 32.0, 64.0].iter().map(|k| max_diff(&run_to_one(scheme, 1.0 / k), &reference)).collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.8 && order < 2.3, "{scheme:?}: errors {errs:?}");
        }
    }
}

#[test]
fn critical_front_propagates_rigidly() {
    let spec = ModelSpec::fkpp();
    let pinch = find_pinched_double_root(&spec).unwrap();
    let front = solve_front(&spec, &pinch, (-40.0, 60.0), 4000).unwrap();
    let mut cfg = SimConfig::new((-40.0, 160.0), 8000, 0.005, 50.0);
    cfg.initial = InitialData::Front { shift: 0.0 };
    let run = run_invasion(&spec, &cfg, Some(&front)).unwrap();
    let xs = cfg.grid().xs();
    let err = xs.iter().zip(&run.final_state.u).map(|(&x, v)| (v - front.eval_phase(x - 100.0)).abs()).fold(0.0, f64::max);
    assert!(err < 1e-3, "sup error {err:e}");
    let drift = run.series.iter().map(|(t, s)| (s - pinch.c_star * t).abs()).fold(0.0, f64::max);
    assert!(drift < 0.05, "drift {drift}");
}

#[test]
fn weighted_norm_of_shifted_front_is_interpolation_error() {
    let spec = ModelSpec::fkpp();
    let pinch = find_pinched_double_root(&spec).unwrap();
    let front = solve_front(&spec, &pinch, (-40.0, 60.0), 4000).unwrap();
    let cfg = SimConfig::new((-40.0, 160.0), 8001, 0.01, 0.0);
    let s = 37.3;
    let u: Vec<f64> = cfg.grid().xs().iter().map(|&x| front.eval_phase(x - s)).collect();
    let w = Weights::new(pinch.eta_star, spec.order_half);
    let norm = weighted_perturbation_norm(&cfg.grid(), &u, &front, &w, s);
    assert!(norm < 1e-5, "{norm}");
}

#[test]
fn weighted_norm_of_zero_is_tail_bounded() {
    let spec = ModelSpec::fkpp();
    let pinch = find_pinched_double_root(&spec).unwrap();
    let front = solve_front(&spec, &pinch, (-40.0, 60.0), 4000).unwrap();
    let cfg = SimConfig::new((-40.0, 60.0), 2001, 0.01, 0.0);
    let w = Weights::new(pinch.eta_star, spec.order_half);
    let u = vec![0.0; 2001];
    let norm = weighted_perturbation_norm(&cfg.grid(), &u, &front, &w, 0.0);
    // ρ_{−1} ω q* → 1 at the right end; the bump comes from the interior
    assert!(norm.is_finite() && norm > 0.9 && norm < 10.0, "{norm}");
}

use frontlab::approx::*;
use frontlab::dispersion::find_pinched_double_root;
use frontlab::front::solve_front;
use frontlab::interp::UniformGrid;
use frontlab::weights::Weights;
use frontlab::ModelSpec;

fn fkpp_interior() -> (ModelSpec, frontlab::PinchResult, Interior, f64) {
    let spec = ModelSpec::fkpp();
    let pinch = find_pinched_double_root(&spec).unwrap();
    let front = solve_front(&spec, &pinch, (-40.0, 60.0), 4000).unwrap();
    let w = Weights::new(pinch.eta_star, spec.order_half);
    let a = front.a_coeff;
    (spec, pinch, Interior::from_front(&front, &w), a)
}

#[test]
fn frozen_front_is_a_traveling_wave() {
    let (spec, pinch, interior, _) = fkpp_interior();
    let w = Weights::new(pinch.eta_star, 1);
    let g = UniformGrid::new(-20.0, 40.0, 3001);
    let v = |xs: &[f64], _t: f64| xs.iter().map(|&x| interior.eval(&w, x).0).collect::<Vec<_>>();
    let r = weighted_residual(&spec, &w, pinch.c_star, 0.0, 100.0, &g, 0.0, 0.01, &v);
    let m = r.iter().map(|x| x.abs()).fold(0.0, f64::max);
    assert!(m < 1e-5, "frozen residual {m}");
    // with the delay term the residual is exactly κ/(t+T) (v_x − η v) in the tail
    let r = weighted_residual(&spec, &w, pinch.c_star, 1.5, 100.0, &g, 0.0, 0.01, &v);
    let i = g.nearest(30.0);
    let (vv, dv) = interior.eval(&w, g.x(i));
    assert!((r[i] - 1.5 / 100.0 * (dv - vv)).abs() < 1e-6);
}

#[test]
fn small_t_has_no_matching_shift() {
    let (spec, pinch, interior, a) = fkpp_interior();
    assert!(a < -1.5, "a = {a}");
    let ap = build_approx(&spec, &pinch, interior, &ApproxSettings::default()).unwrap();
    assert!(matches!(ap.compute_zeta(0.0), Err(ApproxError::NoContraction { .. })));
}

#[test]
fn large_t_matches_and_decays() {
    let (spec, pinch, interior, a) = fkpp_interior();
    let settings = ApproxSettings { t_shift: 1e5, ..Default::default() };
    let mut ap = build_approx(&spec, &pinch, interior.clone(), &settings).unwrap();
    let ts = default_t_samples(1e5, 8);
    ap.tabulate_zeta(1e6, 24).unwrap();
    for &t in &ts {
        assert!(ap.value_mismatch(t).unwrap() < 1e-8);
        assert!((ap.zeta(t).unwrap() - ap.compute_zeta(t).unwrap()).abs() < 1e-6);
    }
    let env = zeta_envelope(&ap, &ts).unwrap();
    assert!(env.samples.windows(2).all(|p| p[1].1.abs() < p[0].1.abs()));
    assert!(env.holds, "exponent {}", env.exponent);

    let bad = build_approx(&spec, &pinch, interior, &ApproxSettings { x0: Some(a + 1.0), ..settings }).unwrap();
    let env = zeta_envelope(&bad, &ts).unwrap();
    assert!(!env.holds, "negative control exponent {}", env.exponent);
}

#[test]
fn decay_table_at_large_t() {
    let (spec, pinch, interior, _) = fkpp_interior();
    let ap = build_approx(&spec, &pinch, interior, &ApproxSettings { t_shift: 1e4, ..Default::default() }).unwrap();
    let tab = residual_decay_check(&ap, &default_t_samples(1e4, 6)).unwrap();
    assert!(tab.rows.iter().all(|r| r.norm.is_finite() && r.norm > 0.0));
    assert!(tab.passed);
}

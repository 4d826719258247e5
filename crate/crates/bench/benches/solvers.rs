use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use frontlab::approx::solve_psi1;
use frontlab::dispersion::find_pinched_double_root;
use frontlab::front::solve_front;
use frontlab::simulator::Simulator;
use frontlab::{ModelSpec, SimConfig};

fn pinch(c: &mut Criterion) {
    let mut g = c.benchmark_group("pinch");
    for (name, spec) in [("fkpp", ModelSpec::fkpp()), ("efkpp_0.1", ModelSpec::efkpp(0.1))] {
        g.bench_function(name, |b| b.iter(|| find_pinched_double_root(black_box(&spec)).unwrap()));
    }
    g.finish();
}

fn front(c: &mut Criterion) {
    let spec = ModelSpec::fkpp();
    let p = find_pinched_double_root(&spec).unwrap();
    c.bench_function("front/fkpp_n4000", |b| b.iter(|| solve_front(&spec, &p, (-40.0, 60.0), black_box(4000)).unwrap()));
}

fn psi1(c: &mut Criterion) {
    let spec = ModelSpec::fkpp();
    let p = find_pinched_double_root(&spec).unwrap();
    c.bench_function("psi1/n2000", |b| b.iter(|| solve_psi1(p.alpha, 0.0, p.eta_star, 1.0, 40.0, black_box(2000)).unwrap()));
}

fn sim_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("sim_step");
    for (name, spec, dt) in [("fkpp_n17000", ModelSpec::fkpp(), 0.01), ("efkpp_n17000", ModelSpec::efkpp(0.1), 0.002)] {
        let cfg = SimConfig::new((-100.0, 1600.0), 17000, dt, 1.0);
        let sim = Simulator::new(&spec, &cfg).unwrap();
        let mut st = sim.initial_state(None).unwrap();
        g.bench_function(name, |b| b.iter(|| sim.step(black_box(&mut st)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, pinch, front, psi1, sim_step);
criterion_main!(benches);

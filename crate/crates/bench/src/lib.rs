//! Criterion benchmarks for the frontlab solvers; see `benches/`.

//! Benchmarks for the hot paths: exact solving, objective evaluation,
//! model rendering, and simulation throughput.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use fogweave_bench::{scenario, solved_app1};
use fogweave_core::eval::system_objective;
use fogweave_core::milp::{build_model, render_lp};
use fogweave_core::montecarlo::simulate_request;
use fogweave_core::solver::{solve_exact, SolveParams};

fn bench_solve_single_app(c: &mut Criterion) {
    let s = scenario();
    let one = &s.requests[..1];
    let params = SolveParams::default();
    let mut g = c.benchmark_group("solve");
    g.sample_size(20);
    g.bench_function("single_app_hybrid", |b| {
        b.iter(|| solve_exact(black_box(&s.infra), black_box(one), 0.5, &params).unwrap())
    });
    g.finish();
}

fn bench_solve_pipeline_pair(c: &mut Criterion) {
    let s = scenario();
    let pair = &s.requests[..2];
    let params = SolveParams::default();
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    g.bench_function("pipeline_pair_hybrid", |b| {
        b.iter(|| solve_exact(black_box(&s.infra), black_box(pair), 0.5, &params).unwrap())
    });
    g.finish();
}

fn bench_objective_evaluation(c: &mut Criterion) {
    let s = scenario();
    let placement = solved_app1(&s);
    let one = &s.requests[..1];
    c.bench_function("system_objective_single_app", |b| {
        b.iter(|| system_objective(black_box(&placement), one, &s.infra, 0.5).unwrap())
    });
}

fn bench_model_render(c: &mut Criterion) {
    let s = scenario();
    let one = &s.requests[..1];
    c.bench_function("build_and_render_model", |b| {
        b.iter(|| {
            let model = build_model(black_box(&s.infra), one, 0.5).unwrap();
            black_box(render_lp(&model))
        })
    });
}

fn bench_simulation(c: &mut Criterion) {
    let s = scenario();
    let placement = solved_app1(&s);
    let request = &s.requests[0];
    c.bench_function("simulate_1000_samples", |b| {
        b.iter(|| simulate_request(black_box(&placement), request, &s.infra, 1_000, 7).unwrap())
    });
}

criterion_group!(
    benches,
    bench_solve_single_app,
    bench_solve_pipeline_pair,
    bench_objective_evaluation,
    bench_model_render,
    bench_simulation
);
criterion_main!(benches);

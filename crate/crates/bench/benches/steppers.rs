use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use egr_bench::systems;
use egr_core::{integrate, validate_closed_forms, Method, PhaseState, SolverConfig};

fn single_step(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("step");
    for (name, model, (x0, y0)) in systems() {
        let s = PhaseState::new(0.0, x0, y0);
        for method in Method::ALL {
            let stepper = method.stepper(&cfg);
            group.bench_with_input(BenchmarkId::new(method.as_str(), name), &s, |b, s| {
                b.iter(|| stepper.step(&model, black_box(s), &cfg).unwrap())
            });
        }
    }
    group.finish();
}

fn thousand_steps(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("integrate-1e3");
    for (name, model, ic) in systems() {
        for method in [Method::EnGr, Method::Imr, Method::Sv, Method::Rk4_38] {
            group.bench_function(BenchmarkId::new(method.as_str(), name), |b| {
                b.iter(|| integrate(&model, method, black_box(ic), &cfg, 1.0).unwrap())
            });
        }
    }
    group.finish();
}

fn closed_form_check(c: &mut Criterion) {
    let (_, model, _) = systems()[2];
    c.bench_function("validate_closed_forms/duffing/1000", |b| b.iter(|| validate_closed_forms(&model, 1000, 1)));
}

criterion_group!(benches, single_step, thousand_steps, closed_form_check);
criterion_main!(benches);

use std::hint::black_box;

use couette::fem1d::{assemble_momentum_operator, solve_tridiagonal_into};
use couette::ode::{ode_step, OdeState};
use couette::scheme::fluidity_update;
use couette::{Grid, Parameters};
use couette_bench::homogeneous_fixture;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for n in [200, 500] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let (mut stepper, mut state) = homogeneous_fixture(n, 0.01);
            b.iter(|| stepper.advance(black_box(&mut state)).unwrap());
        });
    }
    group.finish();
}

fn tridiagonal(c: &mut Criterion) {
    let mut group = c.benchmark_group("tridiagonal");
    let p = Parameters::default();
    for n in [200, 500, 5000] {
        let op = assemble_momentum_operator(&p, &Grid::new(n).unwrap(), 0.01).unwrap();
        let rhs: Vec<f64> = (0..op.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut x = vec![0.0; op.len()];
        let mut scratch = vec![0.0; op.len()];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solve_tridiagonal_into(&op, black_box(&rhs), &mut x, &mut scratch).unwrap());
        });
    }
    group.finish();
}

fn pointwise(c: &mut Criterion) {
    let p = Parameters::default();
    c.bench_function("fluidity_update", |b| {
        b.iter(|| fluidity_update(black_box(0.4), black_box(1.3), &p, 0.01))
    });
    c.bench_function("ode_step", |b| {
        let s = OdeState {
            t: 0.0,
            tau: 0.5,
            f: 0.5,
        };
        b.iter(|| ode_step(black_box(s), &p, 1.0, 0.01))
    });
}

criterion_group!(benches, step, tridiagonal, pointwise);
criterion_main!(benches);

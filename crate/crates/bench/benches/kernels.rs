use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qmlp_bench::{circuit, model, spd_matrix};
use qmlp_core::features::eigendecompose;
use qmlp_core::model::Architecture;
use qmlp_core::qsim::{adjoint_vjp, circuit_jacobian, dense_matrix_oracle, run_circuit};
use std::hint::black_box;

fn simulate(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_circuit");
    for n in [2, 4, 7, 10] {
        let (spec, x) = circuit(n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| run_circuit(black_box(&spec), black_box(&x)).unwrap())
        });
    }
    g.finish();

    let (spec, x) = circuit(4, 1);
    c.bench_function("dense_oracle/4", |b| {
        b.iter(|| dense_matrix_oracle(black_box(&spec), black_box(&x)).unwrap())
    });
}

fn gradients(c: &mut Criterion) {
    let mut g = c.benchmark_group("circuit_gradient");
    for n in [4, 7] {
        let (spec, x) = circuit(n, 2);
        let upstream = vec![1.0; n];
        g.bench_with_input(BenchmarkId::new("parameter_shift", n), &n, |b, _| {
            b.iter(|| circuit_jacobian(black_box(&spec), black_box(&x)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("adjoint", n), &n, |b, _| {
            b.iter(|| adjoint_vjp(black_box(&spec), black_box(&x), black_box(&upstream)).unwrap())
        });
    }
    g.finish();
}

fn spd(c: &mut Criterion) {
    let z = spd_matrix(3);
    c.bench_function("eigendecompose/35", |b| {
        b.iter(|| eigendecompose(black_box(&z)).unwrap())
    });
}

fn models(c: &mut Criterion) {
    let mut g = c.benchmark_group("model");
    for arch in Architecture::ALL {
        let (m, x, t) = model(arch, 1017, 4);
        g.bench_function(BenchmarkId::new("forward", arch.name()), |b| {
            b.iter(|| m.forward(black_box(&x)).unwrap())
        });
        g.bench_function(BenchmarkId::new("backward", arch.name()), |b| {
            b.iter(|| m.backward(black_box(&x), black_box(&t)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, simulate, gradients, spd, models);
criterion_main!(benches);

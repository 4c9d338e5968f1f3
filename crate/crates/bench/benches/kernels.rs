use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use lkv_bench::laplacian_problem;
use lkv_core::baselines::{two_pass_lanczos, TwoPassConfig};
use lkv_core::krylov::arnoldi;
use lkv_core::quadrature::build_laplace_rule;
use lkv_core::restart::{power_neg_three_halves, restarted_laplace, RestartConfig};
use lkv_core::smallmat::{eig_hermitian, expm_e1_batch};
use lkv_core::spline::CubicSpline;
use lkv_core::LinearOperator;

fn spmv(c: &mut Criterion) {
    let mut group = c.benchmark_group("spmv");
    for n in [20, 40] {
        let (a, b) = laplacian_problem(n);
        let mut y = vec![0.0; a.dim()];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| a.apply(black_box(&b), &mut y))
        });
    }
    group.finish();
}

fn arnoldi_cycle(c: &mut Criterion) {
    let (a, b) = laplacian_problem(20);
    c.bench_function("arnoldi m=50 n=8000", |bench| {
        bench.iter(|| arnoldi(&a, black_box(&b), 50).unwrap())
    });
}

fn small_matrix_exponentials(c: &mut Criterion) {
    let (a, b) = laplacian_problem(20);
    let dec = arnoldi(&a, &b, 50).unwrap();
    let h = dec.hessenberg().clone();
    let nu = eig_hermitian(&h).unwrap().eigenvalues()[0];
    let rule = build_laplace_rule(|t| t.sqrt(), nu, 1e-10).unwrap();
    let mut group = c.benchmark_group("exp(-tH)e1 batch");
    group.bench_function("spectral", |bench| {
        bench.iter(|| {
            let cache = eig_hermitian(&h).unwrap();
            expm_e1_batch(&h, rule.nodes(), Some(&cache)).unwrap()
        })
    });
    group.sample_size(10);
    group.bench_function("taylor", |bench| {
        bench.iter(|| expm_e1_batch(&h, rule.nodes(), None).unwrap())
    });
    group.finish();
}

fn quadrature_rule(c: &mut Criterion) {
    c.bench_function("laplace rule sqrt(t), eps 1e-10", |bench| {
        bench.iter(|| build_laplace_rule(|t| t.sqrt(), black_box(0.1), 1e-10).unwrap())
    });
}

fn spline_fit(c: &mut Criterion) {
    let x: Vec<f64> = (0..400).map(|i| (i as f64 * 0.05).powi(2)).collect();
    let y: Vec<f64> = x.iter().map(|t| (-t).exp()).collect();
    c.bench_function("spline fit 400 knots", |bench| {
        bench.iter(|| CubicSpline::fit(black_box(&x), &y).unwrap())
    });
}

fn full_runs(c: &mut Criterion) {
    let (a, b) = laplacian_problem(20);
    let f = power_neg_three_halves();
    let mut group = c.benchmark_group("A^-3/2 b, n=8000, m=50");
    group.sample_size(10);
    group.bench_function("restarted laplace", |bench| {
        let cfg = RestartConfig::new(50, 1e-7);
        bench.iter(|| restarted_laplace(&a, &b, &f, &cfg, None).unwrap())
    });
    group.bench_function("two-pass lanczos", |bench| {
        let cfg = TwoPassConfig::new(1e-7, 50);
        bench.iter(|| two_pass_lanczos(&a, &b, |s| s.powf(-1.5), &cfg, None).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    spmv,
    arnoldi_cycle,
    small_matrix_exponentials,
    quadrature_rule,
    spline_fit,
    full_runs
);
criterion_main!(benches);

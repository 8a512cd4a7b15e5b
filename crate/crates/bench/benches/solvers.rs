use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nlbeam_bench::problem;
use nlbeam_core::anet2d::solve_anet;
use nlbeam_core::ntbm1d::solve_ntbm;
use nlbeam_core::{FixedPointConfig, GmresConfig, OrderDistribution, SolverMethod};

fn ntbm(c: &mut Criterion) {
    let mut group = c.benchmark_group("ntbm");
    group.sample_size(10);
    for ny in [12usize, 24, 46] {
        let p = problem(OrderDistribution::linear(), ny);
        group.bench_with_input(BenchmarkId::from_parameter(ny), &p, |b, p| {
            b.iter(|| solve_ntbm(p, &FixedPointConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn anet(c: &mut Criterion) {
    let mut group = c.benchmark_group("anet2d");
    group.sample_size(10);
    for ny in [8usize, 12] {
        let p = problem(OrderDistribution::linear(), ny);
        group.bench_with_input(BenchmarkId::new("direct", ny), &p, |b, p| {
            b.iter(|| solve_anet(p, SolverMethod::Direct, &GmresConfig::default()).unwrap())
        });
        let p = problem(OrderDistribution::uniform(0.8), ny);
        group.bench_with_input(BenchmarkId::new("iterative", ny), &p, |b, p| {
            b.iter(|| solve_anet(p, SolverMethod::Iterative, &GmresConfig::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ntbm, anet);
criterion_main!(benches);

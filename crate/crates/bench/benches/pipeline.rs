use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fsa_bench::fixture;
use fsa_core::{
    eig_curves, eig_hermitian, finite_spectrum_approximate, random_hermitian_seeded,
    InstanceSpec, PipelineConfig,
};
use std::hint::black_box;

fn bench_eig(c: &mut Criterion) {
    let mut g = c.benchmark_group("eig_hermitian");
    for n in [2usize, 4, 8] {
        let h = random_hermitian_seeded(n, 7);
        g.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| {
            b.iter(|| eig_hermitian(black_box(h)).unwrap())
        });
    }
    g.finish();
}

fn bench_curves(c: &mut Criterion) {
    let mut g = c.benchmark_group("eig_curves");
    for n in [2usize, 4] {
        let x = fixture(n, 256, 11);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| eig_curves(black_box(x)).unwrap())
        });
    }
    g.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let x = InstanceSpec::ConstantDiag(vec![-0.4, 0.3]).build(256).unwrap();
    c.bench_function("approx constant-diag eps=0.1", |b| {
        b.iter(|| finite_spectrum_approximate(black_box(&x), 0.1, &cfg).unwrap())
    });
    let r = fixture(3, 256, 5);
    c.bench_function("approx random n=3 eps=0.5", |b| {
        b.iter(|| finite_spectrum_approximate(black_box(&r), 0.5, &cfg).is_ok())
    });
}

criterion_group!(benches, bench_eig, bench_curves, bench_pipeline);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use palmfact_bench::{hadamard_pair, probe_vector};
use std::hint::black_box;

fn matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("hadamard_matvec");
    for n in [64usize, 256, 1024] {
        let (op, dense) = hadamard_pair(n);
        let v = probe_vector(n);
        group.bench_with_input(BenchmarkId::new("butterfly", n), &v, |b, v| {
            b.iter(|| op.apply(black_box(v)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dense", n), &v, |b, v| {
            b.iter(|| dense.matvec(black_box(v)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, matvec);
criterion_main!(benches);

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use seqpar_bench::corpus;
use seqpar_core::{classify, dense_sample_oracle, plan, verify, Degeneracy};

fn bench_classify(c: &mut Criterion) {
    let scenarios = corpus(4, 4, 3, 4, Degeneracy::Mixed, 32);
    c.bench_function("classify/d4_m4_n3_r4", |b| {
        b.iter(|| {
            for s in &scenarios {
                black_box(classify(black_box(s)).unwrap());
            }
        })
    });
}

fn bench_plan(c: &mut Criterion) {
    let mut group = c.benchmark_group("plan");
    for (m, n, r) in [(2, 1, 2), (3, 2, 3), (4, 3, 4)] {
        for degeneracy in [Degeneracy::None, Degeneracy::Mixed] {
            let scenarios = corpus(2, m, n, r, degeneracy, 16);
            let id = format!("m{m}_n{n}_r{r}_{degeneracy:?}");
            group.bench_with_input(BenchmarkId::from_parameter(id), &scenarios, |b, ss| {
                b.iter(|| {
                    for s in ss {
                        black_box(plan(s).unwrap());
                    }
                })
            });
        }
    }
    group.finish();
}

fn bench_verify(c: &mut Criterion) {
    let scenarios = corpus(2, 3, 2, 3, Degeneracy::Mixed, 8);
    let bundles: Vec<_> = scenarios.iter().map(|s| plan(s).unwrap()).collect();
    let mut group = c.benchmark_group("verify");
    group.bench_function("analytic", |b| {
        b.iter(|| {
            for (s, bundle) in scenarios.iter().zip(&bundles) {
                black_box(verify(s, bundle).unwrap());
            }
        })
    });
    group.sample_size(10);
    group.bench_function("oracle_1000", |b| {
        b.iter(|| {
            for (s, bundle) in scenarios.iter().zip(&bundles) {
                black_box(dense_sample_oracle(s, bundle, 1000).unwrap());
            }
        })
    });
    group.finish();
}

criterion_group!(benches, bench_classify, bench_plan, bench_verify);
criterion_main!(benches);

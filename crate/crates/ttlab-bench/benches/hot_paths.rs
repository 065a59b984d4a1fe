//! Throughput of the samplers, the branching random walk fill, and the
//! two-sample KS reduction. Run with `cargo bench -p ttlab-bench`.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;
use ttlab_core::brw::{martingale_statistic, sample_generation, EpsSign};
use ttlab_core::harness::{ks_two_sample, EmpiricalDistribution};
use ttlab_core::rng::SeedSpec;
use ttlab_core::sampler::{
    sample_tree_recursive, sample_tree_rejection, sample_tree_spacings,
};
use ttlab_core::stats;
use ttlab_core::tree::{SampleBudget, TreeParams};

fn bench_samplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("samplers");
    let params = TreeParams::new(8, 1.0);
    let budget = SampleBudget::default();
    let mut counter = 0u64;
    group.bench_function("recursive_n8_p1", |b| {
        b.iter(|| {
            counter += 1;
            let tree =
                sample_tree_recursive(params, SeedSpec::new(1, counter), budget).unwrap();
            black_box(stats::size(&tree))
        })
    });
    group.bench_function("spacings_n8_p1", |b| {
        b.iter(|| {
            counter += 1;
            let tree = sample_tree_spacings(params, SeedSpec::new(2, counter), budget).unwrap();
            black_box(stats::size(&tree))
        })
    });
    let rejection_params = TreeParams::new(3, 0.7);
    group.bench_function("rejection_n3_p07_depth9", |b| {
        b.iter(|| {
            counter += 1;
            let sample = sample_tree_rejection(
                rejection_params,
                SeedSpec::new(3, counter),
                SampleBudget::with_depth_cap(9),
            )
            .unwrap();
            black_box(stats::size(&sample.tree))
        })
    });
    group.finish();
}

fn bench_brw(c: &mut Criterion) {
    let mut group = c.benchmark_group("brw");
    let mut counter = 0u64;
    group.bench_function("generation_l12", |b| {
        b.iter(|| {
            counter += 1;
            let generation =
                sample_generation(12, 0.0, EpsSign::None, SeedSpec::new(4, counter)).unwrap();
            black_box(martingale_statistic(&generation))
        })
    });
    group.finish();
}

fn bench_ks(c: &mut Criterion) {
    let generation = sample_generation(14, 0.0, EpsSign::None, SeedSpec::new(5, 0)).unwrap();
    let first = EmpiricalDistribution::new(generation.values.clone()).unwrap();
    let shifted: Vec<f64> = generation.values.iter().map(|v| v * 1.01).collect();
    let second = EmpiricalDistribution::new(shifted).unwrap();
    c.bench_function("ks_two_sample_16k", |b| {
        b.iter_batched(
            || (first.clone(), second.clone()),
            |(a, b)| black_box(ks_two_sample(&a, &b)),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_samplers, bench_brw, bench_ks);
criterion_main!(benches);

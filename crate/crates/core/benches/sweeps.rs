use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cvdecay_core::analysis::{discrepancy_report_with, sweep_with};
use cvdecay_core::channels::{BathSpec, ChannelVariant, LocalBathSpec, Scenario};
use cvdecay_core::Execution;

fn sweeps(c: &mut Criterion) {
    let bath = BathSpec::Local(LocalBathSpec::single(1.0, 4.0).unwrap());
    let mut group = c.benchmark_group("sweep");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &exec,
            |b, &exec| {
                b.iter(|| {
                    sweep_with(
                        black_box(Scenario::LocalCase1),
                        0.4,
                        &bath,
                        ChannelVariant::LindbladDerived,
                        4096,
                        exec,
                    )
                    .unwrap()
                })
            },
        );
    }
    group.finish();

    let grid: Vec<f64> = (1..=8).map(|k| 0.2 * k as f64).collect();
    let mut group = c.benchmark_group("discrepancy_report");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &exec,
            |b, &exec| b.iter(|| discrepancy_report_with(black_box(4.0), &grid, exec).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);

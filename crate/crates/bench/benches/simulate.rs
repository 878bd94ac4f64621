use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use confband::{
    check_truncation_conditions, preset_translated, simulate_noncoverage, BandFamily, BandSpec,
    Density, GridSpec, Kernel, TruncationMode,
};

fn bench_simulation(c: &mut Criterion) {
    let density = Density::Gaussian { d: 1 };
    let kernel = Kernel::epanechnikov(1);
    let schedule = preset_translated(0.3, 1, None).unwrap();
    let spec = BandSpec::new(BandFamily::Truncated).with_trunc(TruncationMode::Sup);
    let grid = GridSpec {
        bounds: Some(vec![(-3.0, 3.0)]),
        spacing: None,
    };
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    group.bench_function("noncoverage_n300_r10", |b| {
        b.iter(|| {
            simulate_noncoverage(
                &density,
                &kernel,
                &schedule,
                &spec,
                &grid,
                black_box(&[300]),
                10,
                42,
            )
            .unwrap()
        })
    });
    group.finish();

    c.bench_function("check_truncation_conditions", |b| {
        b.iter(|| check_truncation_conditions(black_box(&schedule)).unwrap())
    });
}

criterion_group!(benches, bench_simulation);
criterion_main!(benches);

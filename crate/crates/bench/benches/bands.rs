use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use confband::{
    band_bickel_rosenblatt, band_truncated, kde_on_grid, preset_translated, u_n, z_alpha,
    EvaluationGrid, Kernel, TruncationMode,
};
use confband_bench::gaussian_sample;

fn bench_band_construction(c: &mut Criterion) {
    let n = 4000u64;
    let kernel = Kernel::epanechnikov(1);
    let schedule = preset_translated(0.3, 1, None).unwrap();
    let grid = EvaluationGrid::new(&[(-3.0, 3.0)], &[0.01]).unwrap();
    let sample = gaussian_sample(11, n as usize);
    let h_n = schedule.h.eval(n).unwrap();
    let h_star_n = schedule.h_star.eval(n).unwrap();
    let fdens = kde_on_grid(&sample, &kernel, h_n, &grid).unwrap();
    let fstar = kde_on_grid(&sample, &kernel, h_star_n, &grid).unwrap();

    c.bench_function("band_truncated_sup_601pts", |b| {
        b.iter(|| {
            band_truncated(
                black_box(&fstar),
                black_box(&fdens),
                &kernel,
                &schedule,
                n,
                TruncationMode::Sup,
                std::f64::consts::SQRT_2,
            )
            .unwrap()
        })
    });

    c.bench_function("band_classical_601pts", |b| {
        b.iter(|| {
            band_bickel_rosenblatt(
                black_box(&fdens),
                &kernel,
                0.05,
                (-3.0, 3.0),
                &schedule,
                n,
            )
            .unwrap()
        })
    });

    c.bench_function("z_alpha", |b| b.iter(|| z_alpha(black_box(0.05)).unwrap()));
    c.bench_function("u_n", |b| {
        b.iter(|| u_n(&kernel, (-3.0, 3.0), black_box(0.08)).unwrap())
    });
}

criterion_group!(benches, bench_band_construction);
criterion_main!(benches);

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use specres::{
    beta_quantize, blasso_grid, condense, esprit, fourier_coefficients, BlassoConfig,
    EspritConfig, QuantizerConfig,
};
use specres_bench::fixture_measure;

fn bench_quantizer(c: &mut Criterion) {
    let mu = fixture_measure(1);
    let mut group = c.benchmark_group("beta_quantize");
    for lambda in [1usize, 4, 10] {
        let cfg = QuantizerConfig::new(28, lambda, 4, 1.0).unwrap();
        let y = fourier_coefficients(&mu, cfg.total_samples());
        group.bench_with_input(BenchmarkId::from_parameter(lambda), &y, |b, y| {
            b.iter(|| beta_quantize(black_box(y), &cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_decoders(c: &mut Criterion) {
    let mu = fixture_measure(2);
    let cfg = QuantizerConfig::new(28, 3, 6, 1.0).unwrap();
    let y = fourier_coefficients(&mu, cfg.total_samples());
    let q = beta_quantize(&y, &cfg).unwrap().q;
    let condensed = condense(&q, &cfg).unwrap();

    let ecfg = EspritConfig::new(28, mu.len()).unwrap();
    c.bench_function("esprit_m28", |b| b.iter(|| esprit(black_box(&condensed), &ecfg).unwrap()));

    let cfg27 = QuantizerConfig::new(27, 3, 6, 1.0).unwrap();
    let y27 = fourier_coefficients(&mu, cfg27.total_samples());
    let v27 = condense(&beta_quantize(&y27, &cfg27).unwrap().q, &cfg27).unwrap();
    let bcfg = BlassoConfig::for_quantizer(&cfg27).unwrap();
    let mut group = c.benchmark_group("blasso");
    group.sample_size(10);
    group.bench_function("grid_m27", |b| b.iter(|| blasso_grid(black_box(&v27), &bcfg).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_quantizer, bench_decoders);
criterion_main!(benches);

//! Criterion benchmarks for the numerical kernels: the exponential
//! integral, the oscillator autocorrelation (closed form vs quadrature
//! oracle), the geometry totals, and the simulation pipeline.

use casimir_core::ensemble::SpectralDistribution;
use casimir_core::geometry::{
    total_noise, total_noise_mc, DipoleCoupling, MaterialSpec, TipSampleGeometry,
};
use casimir_core::oscillator::{autocorr_exact, autocorr_quadrature, OscillatorSpec};
use casimir_core::predict::CantileverParams;
use casimir_core::quad::{integrate_mc, McRegion, QuadratureSettings};
use casimir_core::simulate::{estimate_autocorrelation, simulate_brownian, SimulationConfig};
use casimir_core::specfun::expint_g;
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use std::f64::consts::PI;

fn bench_expint_g(c: &mut Criterion) {
    let mut group = c.benchmark_group("expint_g");
    for (label, z) in [
        ("small", Complex64::new(0.01, 0.002)),
        ("series", Complex64::new(1.5, 0.4)),
        ("continued_fraction", Complex64::new(20.0, 6.0)),
        ("near_imaginary_axis", Complex64::new(0.5, 30.0)),
    ] {
        group.bench_function(label, |b| b.iter(|| expint_g(black_box(z)).unwrap()));
    }
    group.finish();
}

fn bench_autocorrelation(c: &mut Criterion) {
    let spec = OscillatorSpec::new(1.0, 0.1).unwrap();
    let settings = QuadratureSettings::default();
    let mut group = c.benchmark_group("oscillator_autocorr");
    group.bench_function("closed_form", |b| {
        b.iter(|| autocorr_exact(&spec, black_box(12.3)).unwrap())
    });
    group.sample_size(20);
    group.bench_function("quadrature_oracle", |b| {
        b.iter(|| autocorr_quadrature(&spec, black_box(12.3), &settings).unwrap())
    });
    group.finish();
}

fn bench_geometry(c: &mut Criterion) {
    let material = MaterialSpec::new(
        1.0,
        1.0,
        DipoleCoupling::new(1.0).unwrap(),
        SpectralDistribution::debye(1.0).unwrap(),
    )
    .unwrap();
    let geom = TipSampleGeometry::new(1.0, 0.1, [0.0, 0.0, 1.0]).unwrap();
    let mut group = c.benchmark_group("geometry");
    group.bench_function("total_noise_closed", |b| {
        b.iter(|| total_noise(black_box(&geom), black_box(&material)).unwrap())
    });
    group.sample_size(10);
    let settings = QuadratureSettings::default().with_mc_samples(10_000);
    group.bench_function("total_noise_mc_10k", |b| {
        b.iter(|| total_noise_mc(black_box(&geom), black_box(&material), &settings).unwrap())
    });
    group.finish();
}

fn bench_monte_carlo(c: &mut Criterion) {
    let region = McRegion::SphereOverHalfSpace { radius: 1.0, gap: 0.5 };
    let settings = QuadratureSettings::default().with_mc_samples(100_000);
    c.bench_function("integrate_mc_hamaker_100k", |b| {
        b.iter(|| integrate_mc(|p| PI / (6.0 * p[2].powi(3)), black_box(&region), &settings).unwrap())
    });
}

fn bench_simulation(c: &mut Criterion) {
    let params = CantileverParams::new(1e-12, 2.0 * PI * 100.0, 100.0, 4.0).unwrap();
    let ringdown = 2.0 * params.quality / params.omega0;
    let config = SimulationConfig {
        dt: 0.045 * 2.0 * PI / params.omega0,
        duration: 150.0 * ringdown,
        seed: 1,
        params,
        extra_force_psd: 0.0,
        extra_damping: 0.0,
    };
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    group.bench_function("brownian_150_ringdowns", |b| {
        b.iter(|| simulate_brownian(black_box(&config)).unwrap())
    });
    let ts = simulate_brownian(&config).unwrap();
    group.bench_function("autocorrelation_fft", |b| {
        b.iter(|| estimate_autocorrelation(black_box(&ts), 5.0 * ringdown).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_expint_g,
    bench_autocorrelation,
    bench_geometry,
    bench_monte_carlo,
    bench_simulation
);
criterion_main!(benches);

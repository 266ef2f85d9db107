use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use dampo_core::bath::OhmicBath;
use dampo_core::dynamics;
use dampo_core::fano;
use dampo_core::oracle;
use dampo_core::spectral::SpectralDensity;
use dampo_core::states;

fn strong_cutoff() -> SpectralDensity {
    SpectralDensity::parametric(10.0, Complex64::new(0.5, 5.0), Complex64::new(0.5, -5.0)).unwrap()
}

fn spectral(c: &mut Criterion) {
    let sd = strong_cutoff();
    c.bench_function("weighted_average/mean", |b| b.iter(|| black_box(sd.weighted_average(|w| w).unwrap())));
    c.bench_function("thermal_state/beta=1", |b| b.iter(|| black_box(states::thermal_state(&sd, 1.0, 1.0).unwrap())));
}

fn kernels(c: &mut Criterion) {
    let sd = strong_cutoff();
    let times: Vec<f64> = (0..100).map(|i| 0.2 * i as f64).collect();
    c.bench_function("kernels/quadrature/100", |b| b.iter(|| black_box(dynamics::kernels(&sd, &times).unwrap())));
    c.bench_function("kernels/closed_form/100", |b| {
        b.iter(|| black_box(dynamics::closed_form_kernels(&sd, &times).unwrap()))
    });
}

fn coupling(c: &mut Criterion) {
    let bath = OhmicBath::new(0.5, 3.0, 1.0).unwrap();
    let big = (1.0 + 3.0 / std::f64::consts::PI).sqrt();
    let v = bath.coupling(big);
    let mut group = c.benchmark_group("coupling");
    group.sample_size(10);
    group.bench_function("density_from_coupling/ohmic", |b| {
        b.iter(|| black_box(fano::density_from_coupling(&v, big).unwrap()))
    });
    let disc = oracle::discretize(&v, big, 1.0, 300, 30.0).unwrap();
    group.bench_function("oracle/normal_modes/300", |b| b.iter(|| black_box(disc.normal_modes().unwrap())));
    group.finish();
}

criterion_group!(benches, spectral, kernels, coupling);
criterion_main!(benches);

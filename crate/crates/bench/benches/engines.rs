use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ndpo_core::analytic::{gaussian_widths, q_coefficients, q_two_mode, variance_two_mode, Horizon};
use ndpo_core::fock::{
    build_liouvillian, evolve, DensityMatrix, FockConfig, NormalModeEngine, PumpConvention,
};
use ndpo_core::ModelParams;
use num_complex::Complex64;

fn params() -> ModelParams {
    ModelParams::symmetric(1.0, 0.2, 0.5).unwrap()
}

fn analytic(c: &mut Criterion) {
    let p = params();
    c.bench_function("variance_two_mode", |b| {
        b.iter(|| variance_two_mode(black_box(&p), Horizon::At(black_box(2.0))).unwrap())
    });
    let coeffs = q_coefficients(&gaussian_widths(&p, 2.0).unwrap()).unwrap();
    let (a, bb) = (Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4));
    c.bench_function("q_two_mode", |b| {
        b.iter(|| q_two_mode(black_box(&coeffs), black_box(a), black_box(bb)))
    });
}

fn liouvillian(c: &mut Criterion) {
    let p = params();
    let mut g = c.benchmark_group("build_liouvillian");
    for n in [8, 12, 16] {
        let cfg = FockConfig::new(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| {
            b.iter(|| build_liouvillian(&p, cfg).unwrap())
        });
    }
    g.finish();
}

fn evolution(c: &mut Criterion) {
    let p = params();
    let mut g = c.benchmark_group("evolve_to_t1");
    g.sample_size(10);
    let n = 10;
    let l = build_liouvillian(&p, &FockConfig::new(n).unwrap()).unwrap();
    let rho0 = DensityMatrix::vacuum(n);
    g.bench_function("direct_n10", |b| b.iter(|| evolve(&l, &rho0, &[0.0, 1.0]).unwrap()));
    g.finish();
}

fn normal_mode(c: &mut Criterion) {
    let p = params();
    let mut g = c.benchmark_group("normal_mode_steady");
    g.sample_size(10);
    for n in [30, 60] {
        let engine = NormalModeEngine::new(&p, n, n, PumpConvention::Hamiltonian).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &engine, |b, e| {
            b.iter(|| e.steady_state().unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, analytic, liouvillian, evolution, normal_mode);
criterion_main!(benches);

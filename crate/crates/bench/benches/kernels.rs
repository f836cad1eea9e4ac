//! Hot-path benchmarks: the Helmholtz solve behind every operator, one
//! resolvent-norm point, a corrector build, and the Airy primitives.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64 as C64;

use shearstab_core::boundary_layer::{airy, airy_a0, build_correctors};
use shearstab_core::orr_sommerfeld::{
    resolvent_norm, BoundaryCondition, OSProblem, OutputNorm, ResolventPair, SourceNorm,
};
use shearstab_core::profiles::{make_profile, ProfileKind};
use shearstab_core::spectral::{Field, HelmholtzBc, SpectralWorkspace};

fn bench_helmholtz(c: &mut Criterion) {
    let mut group = c.benchmark_group("helmholtz_solve");
    for n in [128usize, 256, 384] {
        let ws = SpectralWorkspace::new(n);
        let f = Field::from_real_fn(&ws, 1, |y| (3.0 * y).sin());
        ws.alpha_cache(1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| ws.helmholtz_solve(1, &f, HelmholtzBc::Dirichlet).unwrap())
        });
    }
    group.finish();
}

fn bench_resolvent_point(c: &mut Criterion) {
    let mut group = c.benchmark_group("resolvent_norm_point");
    group.sample_size(10);
    let profile = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
    for n in [128usize, 256] {
        let ws = SpectralWorkspace::new(n);
        let prob = OSProblem::new(1e-3, 1, 0.4, BoundaryCondition::NonSlip).unwrap();
        let pair = ResolventPair::new(SourceNorm::Hm1, OutputNorm::L2W);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| resolvent_norm(&ws, &profile, &prob, pair).unwrap())
        });
    }
    group.finish();
}

fn bench_correctors(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_correctors");
    group.sample_size(10);
    let profile = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
    let ws = SpectralWorkspace::new(192);
    let prob = OSProblem::new(1e-3, 1, 0.5, BoundaryCondition::NonSlip).unwrap();
    group.bench_function("n192_nu1e-3", |b| {
        b.iter(|| build_correctors(&ws, &profile, &prob, 10.0).unwrap())
    });
    group.finish();
}

fn bench_airy(c: &mut Criterion) {
    c.bench_function("airy_series", |b| {
        b.iter(|| airy(C64::new(2.0, -1.5)))
    });
    c.bench_function("airy_asymptotic", |b| {
        b.iter(|| airy(C64::from_polar(20.0, -0.5)))
    });
    c.bench_function("airy_a0", |b| {
        b.iter(|| airy_a0(C64::new(3.0, 0.5), 1))
    });
}

criterion_group!(
    benches,
    bench_helmholtz,
    bench_resolvent_point,
    bench_correctors,
    bench_airy
);
criterion_main!(benches);

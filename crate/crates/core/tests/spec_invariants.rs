//! Cross-module invariants: grid-refinement stability, the elliptic
//! velocity bound, weak-type sanity, perturbation robustness.

use num_complex::Complex64 as C64;
use shearstab_core::boundary_layer::check_c_bounds;
use shearstab_core::orr_sommerfeld::{
    resolvent_norm, solve_os, weak_type_ratio, BoundaryCondition, OSProblem, OutputNorm,
    ResolventPair, SourceNorm,
};
use shearstab_core::profiles::{make_profile, ProfileKind};
use shearstab_core::spectral::{Field, HelmholtzBc, NormKind, SpectralWorkspace};

fn smooth(ws: &SpectralWorkspace, alpha: u32) -> Field {
    Field::from_fn(ws, alpha, |y| {
        C64::new((2.0 * y).sin() * (1.0 - y * y), 0.4 * (3.0 * y).cos())
    })
}

#[test]
fn solves_and_norms_stable_under_grid_doubling() {
    // every solve/norm changes by < 1e-8 relative when n doubles on smooth data
    let ws1 = SpectralWorkspace::new(128);
    let ws2 = SpectralWorkspace::new(256);
    let f1 = smooth(&ws1, 1);
    let f2 = smooth(&ws2, 1);
    let psi1 = ws1.helmholtz_solve(1, &f1, HelmholtzBc::Dirichlet).unwrap();
    let psi2 = ws2.helmholtz_solve(1, &f2, HelmholtzBc::Dirichlet).unwrap();
    // compare at off-grid points via interpolation
    for &y in &[-0.9, -0.33, 0.0, 0.51, 0.87] {
        let a = ws1.interp(&psi1.values, y);
        let b = ws2.interp(&psi2.values, y);
        assert!(
            (a - b).norm() <= 1e-8 * b.norm().max(1e-8),
            "helmholtz drift at y={y}"
        );
    }
    for kind in [
        NormKind::L2,
        NormKind::L1,
        NormKind::HkAlpha(2),
        NormKind::H1Dual,
        NormKind::WeightedSqrt1My2,
    ] {
        let a = ws1.norm(&f1, kind).unwrap();
        let b = ws2.norm(&f2, kind).unwrap();
        assert!(
            (a - b).abs() <= 1e-8 * b.abs(),
            "norm {kind:?} drift: {a} vs {b}"
        );
    }
}

#[test]
fn velocity_bounded_by_vorticity_over_alpha() {
    // ‖u‖_{L²} ≤ |α|^{-1} ‖w‖_{L²} · C with C → 1 under refinement
    let p = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
    for alpha in [1u32, 2, 4] {
        for n in [96usize, 192] {
            let ws = SpectralWorkspace::new(n);
            let f = smooth(&ws, alpha);
            let prob = OSProblem::new(1e-3, alpha, 0.4, BoundaryCondition::NavierSlip).unwrap();
            let sol = solve_os(&ws, &p, &prob, &f).unwrap();
            let w_l2 = ws.l2_norm(&sol.w.values);
            let u_l2 = sol.u_l2(&ws);
            assert!(
                u_l2 <= w_l2 / alpha as f64 * (1.0 + 1e-10),
                "alpha={alpha} n={n}: {u_l2} > {w_l2}/{alpha}"
            );
        }
    }
}

#[test]
fn weak_type_ratio_is_finite_in_regime() {
    let p = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
    let ws = SpectralWorkspace::new(192);
    let f = Field::from_real_fn(&ws, 1, |y| {
        let q = 1.0 - y * y;
        q * q
    });
    let prob = OSProblem::new(1e-3, 1, 0.4, BoundaryCondition::NavierSlip).unwrap();
    let check = weak_type_ratio(&ws, &p, &prob, &f).unwrap();
    assert!(check.ratio.is_finite() && check.ratio > 0.0);
    // out of regime: nu alpha² = 0.64 > nu^{1/4} alpha^{-1/4} = 0.19 at λ = U(0)
    let prob = OSProblem::new(1e-2, 8, 0.0, BoundaryCondition::NavierSlip).unwrap();
    assert!(weak_type_ratio(&ws, &p, &prob, &f).is_err());
}

#[test]
fn o_shift_perturbation_changes_norms_mildly() {
    // |o| = 0.1 ν^{1/2} α^{1/2} moves resolvent norms by < 10% away from
    // the resonance window
    let p = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
    let ws = SpectralWorkspace::new(128);
    let pair = ResolventPair::new(SourceNorm::L2, OutputNorm::L2W);
    let nu = 1e-3;
    for &lambda in &[0.1, 0.4, 0.9] {
        let base = OSProblem::new(nu, 1, lambda, BoundaryCondition::NavierSlip).unwrap();
        let shifted = base
            .with_o_shift(C64::new(0.1 * nu.sqrt(), 0.0))
            .unwrap();
        let n0 = resolvent_norm(&ws, &p, &base, pair).unwrap();
        let n1 = resolvent_norm(&ws, &p, &shifted, pair).unwrap();
        let rel = (n1 - n0).abs() / n0;
        assert!(rel < 0.10, "lambda={lambda}: o-shift moved norm by {rel:.3}");
    }
}

#[test]
fn c_bounds_restriction_is_enforced() {
    let p = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
    let ws = SpectralWorkspace::new(128);
    let f = Field::from_real_fn(&ws, 1, |y| 1.0 - y * y);
    // nu alpha² = 1e-2·64 = 0.64 > |λ-U(0)|^{1/2} + nu^{1/4} α^{-1/4} ≈ 0.19
    let prob = OSProblem::new(1e-2, 8, 0.0, BoundaryCondition::NonSlip).unwrap();
    assert!(check_c_bounds(&ws, &p, &prob, &f).is_err());
}

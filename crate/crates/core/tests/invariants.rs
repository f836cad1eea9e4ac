//! Property tests for the geometric and spectral primitives.

use proptest::prelude::*;
use shearstab_core::profiles::{critical_points, make_profile, CriticalLayer, ProfileKind};
use shearstab_core::rayleigh::check_coercive;
use shearstab_core::spectral::{seeded_field, sinh_ratio, SpectralWorkspace};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn critical_points_invert_u(lambda in 1e-6f64..0.999999, c4 in 0.0f64..2.0) {
        let p = make_profile(ProfileKind::Quartic, &[c4]).unwrap();
        let lam = lambda * (p.u_max - p.u_min);
        let (y1, y2) = critical_points(&p, lam).unwrap();
        prop_assert!((p.u(y2) - lam).abs() <= 1e-12);
        prop_assert!(y1 == -y2);
        prop_assert!((0.0..=1.0).contains(&y2));
    }

    #[test]
    fn cutoffs_stay_in_unit_range(lambda in 0.05f64..0.95, frac in 0.05f64..1.0, y in -1.0f64..1.0) {
        let p = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
        let (_, y2) = critical_points(&p, lambda).unwrap();
        let delta = frac * y2;
        let layer = CriticalLayer::new(&p, lambda, delta, 0.25 * y2).unwrap();
        let v = layer.rho_delta_c(y);
        prop_assert!((0.0..=1.0).contains(&v));
        let w = layer.rho_delta(y);
        prop_assert!((0.0..=1.0).contains(&w));
        // plateau conditions (the outer plateau may lie outside the channel)
        prop_assert!(layer.rho_delta_c(layer.y2 + delta / 4.0) == 0.0);
        if layer.y2 + 2.0 * delta <= 1.0 {
            prop_assert!(layer.rho_delta_c(layer.y2 + 2.0 * delta) == 1.0);
        }
    }

    #[test]
    fn sinh_ratio_bounded_by_one_for_a_le_b(s in 0.5f64..600.0, a in 0.0f64..2.0) {
        // sinh is increasing, so sinh(sa)/sinh(sb) <= 1 whenever a <= b
        let b = 2.0;
        let v = sinh_ratio(s, a, b);
        prop_assert!(v.is_finite());
        prop_assert!(v <= 1.0 + 1e-12);
        prop_assert!(v >= 0.0);
    }
}

proptest! {
    // the coercive inequality holds for EVERY field: its derivation uses
    // only the elliptic relation and pointwise Cauchy–Schwarz
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn coercive_l2_margin_nonnegative(seed in 0u64..1_000_000, lam_i in 1u32..10, alpha in 1u32..4) {
        let ws = SpectralWorkspace::new(128);
        let p = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
        let lambda = lam_i as f64 * 0.1;
        let w = seeded_field(&ws, alpha, seed, 3);
        let (c, _) = check_coercive(&ws, &p, alpha, lambda, &w).unwrap();
        let scale = c.lhs.abs() + c.rhs.abs();
        prop_assert!(c.rhs - c.lhs >= -1e-8 * scale,
            "margin {} at lambda={lambda}, alpha={alpha}, seed={seed}", c.rhs - c.lhs);
    }
}

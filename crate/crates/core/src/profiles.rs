//! Symmetric background flows `U(y)` with `U(y) = U(-y)` and `inf U'' > 0`,
//! and the critical-layer geometry `U(y₁) = U(y₂) = λ`, `y₁ = -y₂`.
//!
//! Profiles are even polynomials up to degree 8, so all derivatives through
//! `U⁗` are exact.

use serde::{Deserialize, Serialize};

use crate::estimate::EstimateCheck;
use crate::spectral::IntervalGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Poiseuille,
    Quartic,
    CustomCoefficients,
}

/// Symmetric shear profile, stored as coefficients of `y^{2k}`, `k = 0..=4`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowProfile {
    pub name: String,
    /// `even_coeffs[k]` multiplies `y^{2k}`.
    even_coeffs: Vec<f64>,
    pub u_min: f64,
    pub u_max: f64,
}

impl FlowProfile {
    pub fn u(&self, y: f64) -> f64 {
        let y2 = y * y;
        let mut acc = 0.0;
        for &c in self.even_coeffs.iter().rev() {
            acc = acc * y2 + c;
        }
        acc
    }

    pub fn du(&self, y: f64) -> f64 {
        // d/dy Σ c_k y^{2k} = Σ 2k c_k y^{2k-1}
        let y2 = y * y;
        let mut acc = 0.0;
        for (k, &c) in self.even_coeffs.iter().enumerate().rev() {
            if k == 0 {
                continue;
            }
            acc = acc * y2 + 2.0 * k as f64 * c;
        }
        acc * y
    }

    pub fn d2u(&self, y: f64) -> f64 {
        let y2 = y * y;
        let mut acc = 0.0;
        for (k, &c) in self.even_coeffs.iter().enumerate().rev() {
            if k == 0 {
                continue;
            }
            let kf = k as f64;
            acc = acc * y2 + 2.0 * kf * (2.0 * kf - 1.0) * c;
        }
        acc
    }

    pub fn d3u(&self, y: f64) -> f64 {
        let y2 = y * y;
        let mut acc = 0.0;
        for (k, &c) in self.even_coeffs.iter().enumerate().rev() {
            if k <= 1 {
                continue;
            }
            let kf = k as f64;
            acc = acc * y2 + 2.0 * kf * (2.0 * kf - 1.0) * (2.0 * kf - 2.0) * c;
        }
        acc * y
    }

    pub fn d4u(&self, y: f64) -> f64 {
        let y2 = y * y;
        let mut acc = 0.0;
        for (k, &c) in self.even_coeffs.iter().enumerate().rev() {
            if k <= 1 {
                continue;
            }
            let kf = k as f64;
            acc = acc * y2
                + 2.0 * kf * (2.0 * kf - 1.0) * (2.0 * kf - 2.0) * (2.0 * kf - 3.0) * c;
        }
        acc
    }

    /// Validate the S-condition invariants on a dense sample.
    pub fn validate(&self) -> Result<()> {
        let samples = 2001;
        let mut inf_d2u = f64::INFINITY;
        for i in 0..samples {
            let y = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
            if (self.u(y) - self.u(-y)).abs() > 1e-14 {
                return Err(Error::Profile(format!(
                    "symmetry violated at y={y}: U(y)-U(-y) = {:.3e}",
                    self.u(y) - self.u(-y)
                )));
            }
            inf_d2u = inf_d2u.min(self.d2u(y));
        }
        if inf_d2u <= 0.0 {
            return Err(Error::Profile(format!(
                "convexity violated: inf U'' = {inf_d2u:.3e} <= 0 (non-S profile)"
            )));
        }
        // finite-difference consistency of U' at O(h²)
        let h = 1e-5;
        for &y in &[-0.73, -0.2, 0.0, 0.41, 0.9] {
            let fd = (self.u(y + h) - self.u(y - h)) / (2.0 * h);
            if (fd - self.du(y)).abs() > 1e-7 * (1.0 + self.du(y).abs()) {
                return Err(Error::Profile(format!(
                    "derivative inconsistency at y={y}: fd={fd}, du={}",
                    self.du(y)
                )));
            }
        }
        Ok(())
    }

    pub fn inf_d2u(&self) -> f64 {
        let samples = 2001;
        let mut inf = f64::INFINITY;
        for i in 0..samples {
            let y = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
            inf = inf.min(self.d2u(y));
        }
        inf
    }

    /// Debug table of `(y, U, U', U'')`.
    pub fn table(&self, rows: usize) -> String {
        let mut out = String::from("y,U,dU,d2U\n");
        for i in 0..rows {
            let y = -1.0 + 2.0 * i as f64 / (rows - 1) as f64;
            out.push_str(&format!(
                "{:+.6},{:+.9e},{:+.9e},{:+.9e}\n",
                y,
                self.u(y),
                self.du(y),
                self.d2u(y)
            ));
        }
        out
    }
}

/// Build a validated S-profile.
///
/// * `poiseuille`: `U(y) = y²` (no params).
/// * `quartic`: `U(y) = y² + c₄ y⁴` with `params = [c₄]`, `c₄ ≥ 0`.
/// * `custom-coefficients`: `params = [a₀, a₁, ..]` as plain polynomial
///   coefficients up to degree 8; odd coefficients must vanish.
pub fn make_profile(kind: ProfileKind, params: &[f64]) -> Result<FlowProfile> {
    let (name, even_coeffs) = match kind {
        ProfileKind::Poiseuille => ("poiseuille".to_string(), vec![0.0, 1.0]),
        ProfileKind::Quartic => {
            let c4 = params.first().copied().unwrap_or(0.5);
            if c4 < 0.0 {
                return Err(Error::Profile(format!("quartic requires c4 >= 0, got {c4}")));
            }
            (format!("quartic_c4_{c4}"), vec![0.0, 1.0, c4])
        }
        ProfileKind::CustomCoefficients => {
            if params.len() > 9 {
                return Err(Error::Profile(
                    "custom profile limited to polynomial degree 8".into(),
                ));
            }
            for (i, &a) in params.iter().enumerate() {
                if i % 2 == 1 && a.abs() > 1e-14 {
                    return Err(Error::Profile(format!(
                        "odd coefficient a{i} = {a:.3e} breaks the symmetry U(y) = U(-y)"
                    )));
                }
            }
            let mut even = vec![0.0; 5];
            for (i, &a) in params.iter().enumerate() {
                if i % 2 == 0 {
                    even[i / 2] = a;
                }
            }
            while even.len() > 1 && even.last() == Some(&0.0) {
                even.pop();
            }
            ("custom".to_string(), even)
        }
    };
    let mut profile = FlowProfile {
        name,
        even_coeffs,
        u_min: 0.0,
        u_max: 0.0,
    };
    profile.u_min = profile.u(0.0);
    profile.u_max = profile.u(1.0);
    profile.validate()?;
    Ok(profile)
}

/// Bisection roots of `U(y) = λ` on `[0, 1]`, returned as `(y₁, y₂)` with
/// `y₁ = -y₂` exactly.
pub fn critical_points(profile: &FlowProfile, lambda: f64) -> Result<(f64, f64)> {
    if lambda < profile.u_min - 1e-14 || lambda > profile.u_max + 1e-14 {
        return Err(Error::OutOfRange(format!(
            "lambda = {lambda} outside [U(0), U(1)] = [{}, {}]",
            profile.u_min, profile.u_max
        )));
    }
    let lambda = lambda.clamp(profile.u_min, profile.u_max);
    if lambda == profile.u_min {
        return Ok((0.0, 0.0));
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    // U is strictly increasing on (0,1] for S-profiles
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if profile.u(mid) < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let y2 = 0.5 * (lo + hi);
    if (profile.u(y2) - lambda).abs() > 1e-12 {
        return Err(Error::Numerical(format!(
            "bisection failed: |U(y2) - lambda| = {:.3e}",
            (profile.u(y2) - lambda).abs()
        )));
    }
    Ok((-y2, y2))
}

/// Critical layer geometry plus smooth cutoff functions.
#[derive(Debug, Clone)]
pub struct CriticalLayer {
    pub lambda: f64,
    pub y1: f64,
    pub y2: f64,
    /// cutoff width
    pub delta: f64,
    /// interior offset used by the single-point estimate
    pub theta: f64,
    /// `λ = U(0)` collapses the layer to a point; cutoff-based operations
    /// must route to the `λ ≤ U(0)` estimate family instead.
    pub degenerate: bool,
}

impl CriticalLayer {
    pub fn new(profile: &FlowProfile, lambda: f64, delta: f64, theta: f64) -> Result<Self> {
        let (y1, y2) = critical_points(profile, lambda)?;
        let degenerate = y2 <= 0.0;
        if !degenerate && (delta <= 0.0 || delta > y2) {
            return Err(Error::OutOfRange(format!(
                "cutoff width delta = {delta} must satisfy 0 < delta <= y2 = {y2}"
            )));
        }
        Ok(CriticalLayer {
            lambda,
            y1,
            y2,
            delta,
            theta,
            degenerate,
        })
    }

    /// Indicator of `(y₁, y₂)`.
    pub fn chi(&self, y: f64) -> f64 {
        if y > self.y1 && y < self.y2 {
            1.0
        } else {
            0.0
        }
    }

    /// Indicator of the exterior `(-1,1) \ (y₁, y₂)`.
    pub fn chi_c(&self, y: f64) -> f64 {
        1.0 - self.chi(y)
    }

    /// Exterior smooth cutoff: `0` on `(y₁-δ/2, y₂+δ/2)`, `1` outside
    /// `(y₁-δ, y₂+δ)`, cubic Hermite in between (`|ρ'| ≤ 3/δ`).
    pub fn rho_delta_c(&self, y: f64) -> f64 {
        let d = self.delta;
        if y >= self.y1 - d / 2.0 && y <= self.y2 + d / 2.0 {
            0.0
        } else if y <= self.y1 - d || y >= self.y2 + d {
            1.0
        } else if y < self.y1 {
            // transition on (y1-δ, y1-δ/2), descending toward the layer
            smoothstep((self.y1 - d / 2.0 - y) / (d / 2.0))
        } else {
            smoothstep((y - self.y2 - d / 2.0) / (d / 2.0))
        }
    }

    /// Interior smooth cutoff: `1` on `(y₁+δ, y₂-δ)`, `0` outside
    /// `(y₁+δ/2, y₂-δ/2)`.
    pub fn rho_delta(&self, y: f64) -> f64 {
        let d = self.delta;
        let (a, b) = (self.y1, self.y2);
        if b - a <= d {
            return 0.0;
        }
        if y <= a + d / 2.0 || y >= b - d / 2.0 {
            0.0
        } else if y >= a + d && y <= b - d {
            1.0
        } else if y < a + d {
            smoothstep((y - a - d / 2.0) / (d / 2.0))
        } else {
            smoothstep((b - d / 2.0 - y) / (d / 2.0))
        }
    }
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Numerical verification of the profile asymptotics: `U'(y) ∼ y`,
/// `U(y)-U(y') ∼ (y-y')(y+y')`, and the weighted `1/(U-λ)` integral bounds
/// off the critical balls.
pub fn profile_asymptotics_check(profile: &FlowProfile) -> Vec<EstimateCheck> {
    let mut checks = Vec::new();
    let samples = 4001;

    // U'(y)/y bounded above and below
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..samples {
        let y = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
        if y.abs() < 1e-8 {
            continue;
        }
        let r = profile.du(y) / y;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    checks.push(
        EstimateCheck::new("profile.du_over_y", hi, lo, samples)
            .with_param("ratio_hi_over_lo", hi / lo),
    );

    // (U(y)-U(y'))/((y-y')(y+y')) over a sample of pairs
    let mut lo2 = f64::INFINITY;
    let mut hi2 = f64::NEG_INFINITY;
    let m = 141;
    for i in 0..m {
        for j in 0..m {
            let y = -1.0 + 2.0 * i as f64 / (m - 1) as f64;
            let yp = -1.0 + 2.0 * j as f64 / (m - 1) as f64;
            let den = (y - yp) * (y + yp);
            if den.abs() < 1e-8 {
                continue;
            }
            let r = (profile.u(y) - profile.u(yp)) / den;
            lo2 = lo2.min(r);
            hi2 = hi2.max(r);
        }
    }
    checks.push(
        EstimateCheck::new("profile.difference_quotient", hi2, lo2, m * m)
            .with_param("ratio_hi_over_lo", hi2 / lo2),
    );

    // Weighted integral bounds off B_{1,2,δ} for a (λ, δ) sweep:
    //   ‖1/(U-λ)‖_{L^∞}  ≲ 1/((y₂+δ)δ)
    //   ‖1/(U-λ)‖_{L²}   ≲ 1/(δ^{1/2}(y₂+δ))
    //   ‖1/(U-λ)‖_{L¹}   ≲ 1/δ
    //   ‖U'/(U-λ)²‖_{L²} ≲ 1/(δ^{3/2}(y₂+δ))
    let range = profile.u_max - profile.u_min;
    for lam_frac in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let lambda = profile.u_min + lam_frac * range;
        let (y1, y2) = match critical_points(profile, lambda) {
            Ok(v) => v,
            Err(_) => continue,
        };
        for delta in [0.05, 0.1, 0.2] {
            if delta >= y2 {
                continue;
            }
            let segs = exterior_segments(y1, y2, delta);
            let mut linf: f64 = 0.0;
            let mut l2 = 0.0;
            let mut l1 = 0.0;
            let mut h1 = 0.0;
            for (a, b) in segs {
                if b - a < 1e-12 {
                    continue;
                }
                let g = IntervalGrid::new(a, b, 64);
                for (i, &y) in g.nodes.iter().enumerate() {
                    let den = profile.u(y) - lambda;
                    let inv = 1.0 / den;
                    linf = linf.max(inv.abs());
                    l2 += g.quad[i] * inv * inv;
                    l1 += g.quad[i] * inv.abs();
                    let t = profile.du(y) * inv * inv;
                    h1 += g.quad[i] * t * t;
                }
            }
            let params: &[(&str, f64)] = &[("lambda", lambda), ("delta", delta), ("y2", y2)];
            checks.push(
                EstimateCheck::new("profile.inv_linf", linf, 1.0 / ((y2 + delta) * delta), 64)
                    .with_params(params),
            );
            checks.push(
                EstimateCheck::new(
                    "profile.inv_l2",
                    l2.sqrt(),
                    1.0 / (delta.sqrt() * (y2 + delta)),
                    64,
                )
                .with_params(params),
            );
            checks.push(
                EstimateCheck::new("profile.inv_l1", l1, 1.0 / delta, 64).with_params(params),
            );
            checks.push(
                EstimateCheck::new(
                    "profile.du_inv2_l2",
                    h1.sqrt(),
                    1.0 / (delta.powf(1.5) * (y2 + delta)),
                    64,
                )
                .with_params(params),
            );
        }
    }
    checks
}

/// The up-to-three intervals of `(-1,1) \ (B(y₁,δ) ∪ B(y₂,δ))`.
pub fn exterior_segments(y1: f64, y2: f64, delta: f64) -> Vec<(f64, f64)> {
    let mut segs = Vec::new();
    let a1 = (y1 - delta).max(-1.0);
    let b1 = (y1 + delta).min(1.0);
    let a2 = (y2 - delta).max(-1.0);
    let b2 = (y2 + delta).min(1.0);
    if a1 > -1.0 {
        segs.push((-1.0, a1));
    }
    if a2 > b1 {
        segs.push((b1, a2));
    }
    if b2 < 1.0 {
        segs.push((b2, 1.0));
    }
    segs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poiseuille_basics() {
        let p = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
        assert_eq!(p.u(0.5), 0.25);
        assert_eq!(p.d2u(-0.3), 2.0);
        assert_eq!(p.u_min, 0.0);
        assert_eq!(p.u_max, 1.0);
        assert_eq!(p.d3u(0.4), 0.0);
        assert_eq!(p.d4u(0.4), 0.0);
    }

    #[test]
    fn quartic_second_derivative() {
        let p = make_profile(ProfileKind::Quartic, &[0.5]).unwrap();
        for &y in &[-0.9, -0.3, 0.0, 0.6, 1.0] {
            assert!((p.d2u(y) - (2.0 + 6.0 * y * y)).abs() < 1e-14);
        }
        assert!(p.inf_d2u() >= 2.0 - 1e-12);
    }

    #[test]
    fn odd_coefficient_is_rejected() {
        let err = make_profile(ProfileKind::CustomCoefficients, &[0.0, 0.1, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn concave_profile_is_rejected() {
        // U = -y² violates inf U'' > 0
        let err = make_profile(ProfileKind::CustomCoefficients, &[0.0, 0.0, -1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn critical_points_poiseuille() {
        let p = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
        let (y1, y2) = critical_points(&p, 0.25).unwrap();
        assert!((y2 - 0.5).abs() < 1e-12);
        assert_eq!(y1, -y2);
        let (y1, y2) = critical_points(&p, 0.0).unwrap();
        assert_eq!((y1, y2), (0.0, 0.0));
        assert!(critical_points(&p, 1.5).is_err());
        assert!(critical_points(&p, -0.1).is_err());
    }

    #[test]
    fn critical_points_quartic_derived_oracle() {
        // y² + 0.5 y⁴ = 0.375 ⇔ t² + 2t - 0.75 = 0 with t = y², so
        // y₂ = sqrt(（√7 - 2)/2) — frozen from the quadratic formula and
        // cross-checked against the solver's own bisection residual.
        let p = make_profile(ProfileKind::Quartic, &[0.5]).unwrap();
        let (y1, y2) = critical_points(&p, 0.375).unwrap();
        let expect = ((7.0f64.sqrt() - 2.0) / 2.0).sqrt();
        assert!((y2 - expect).abs() < 1e-12, "y2 = {y2}, expect {expect}");
        assert!((p.u(y2) - 0.375).abs() < 1e-12);
        assert_eq!(y1, -y2);
        // λ = U(y) with y = 0.5 for this profile is 0.28125; check the inverse.
        let (_, y2b) = critical_points(&p, 0.28125).unwrap();
        assert!((y2b - 0.5).abs() < 1e-12);
    }

    #[test]
    fn critical_points_monotone_in_lambda() {
        let p = make_profile(ProfileKind::Quartic, &[1.0]).unwrap();
        let mut prev = 0.0;
        for i in 1..60 {
            let lambda = p.u_min + (p.u_max - p.u_min) * i as f64 / 60.0;
            let (_, y2) = critical_points(&p, lambda).unwrap();
            assert!(y2 >= prev, "lambda -> y2 must be nondecreasing");
            prev = y2;
        }
    }

    #[test]
    fn sign_changes_of_u_minus_lambda() {
        let p = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
        for &lambda in &[0.1, 0.5, 0.9] {
            let mut changes = 0;
            let samples = 4001;
            let mut prev = p.u(-1.0) - lambda;
            for i in 1..samples {
                let y = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
                let cur = p.u(y) - lambda;
                if prev * cur < 0.0 {
                    changes += 1;
                }
                prev = cur;
            }
            assert_eq!(changes, 2, "U - {lambda} must change sign exactly twice");
        }
    }

    #[test]
    fn cutoff_properties() {
        let p = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
        let layer = CriticalLayer::new(&p, 0.25, 0.1, 0.05).unwrap();
        let d = layer.delta;
        let samples = 4001;
        let mut max_slope = 0.0f64;
        let mut prev = layer.rho_delta_c(-1.0);
        for i in 1..samples {
            let y = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
            let v = layer.rho_delta_c(y);
            assert!((0.0..=1.0).contains(&v));
            assert!((0.0..=1.0).contains(&layer.rho_delta(y)));
            max_slope = max_slope.max((v - prev).abs() / (2.0 / (samples - 1) as f64));
            prev = v;
        }
        assert!(max_slope <= 4.0 / d + 1e-9, "|rho'| = {max_slope} > 4/delta");
        // plateau checks
        assert_eq!(layer.rho_delta_c(layer.y1 - d / 4.0), 0.0);
        assert_eq!(layer.rho_delta_c(layer.y2 + d / 4.0), 0.0);
        assert_eq!(layer.rho_delta_c(layer.y2 + 2.0 * d), 1.0);
        assert_eq!(layer.rho_delta(0.0), 1.0);
    }

    #[test]
    fn degenerate_layer_flagged() {
        let p = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
        let layer = CriticalLayer::new(&p, 0.0, 0.1, 0.0).unwrap();
        assert!(layer.degenerate);
    }

    #[test]
    fn asymptotics_checks_are_finite() {
        let p = make_profile(ProfileKind::Quartic, &[0.5]).unwrap();
        let checks = profile_asymptotics_check(&p);
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.lhs.is_finite(), "{}: lhs not finite", c.check_id);
            assert!(c.ratio.is_finite(), "{}: ratio not finite", c.check_id);
        }
        // poiseuille: U'(y)/y = 2 exactly
        let pp = make_profile(ProfileKind::Poiseuille, &[]).unwrap();
        let cp = profile_asymptotics_check(&pp);
        let duy = cp.iter().find(|c| c.check_id == "profile.du_over_y").unwrap();
        assert!((duy.lhs - 2.0).abs() < 1e-12 && (duy.rhs - 2.0).abs() < 1e-12);
        // quartic difference quotient stays within [1, 4]
        let dq = checks
            .iter()
            .find(|c| c.check_id == "profile.difference_quotient")
            .unwrap();
        assert!(dq.rhs >= 1.0 - 1e-12 && dq.lhs <= 4.0 + 1e-12);
    }
}

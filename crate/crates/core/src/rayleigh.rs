//! Rayleigh equation with limiting absorption and the coercive machinery
//! around the critical layer.
//!
//! The regularized operator is
//! `Ray_δ W = (U - λ + iδ)W - U'' Ψ = f` with `(∂_y² - α²)Ψ = W`, `Ψ(±1)=0`,
//! solved densely after eliminating `Ψ` through the cached Helmholtz inverse.
//!
//! The inequality checks evaluate, for arbitrary fields `w`:
//!
//! * the coercive pair
//!   `∫ (λ-U)² |(ψ₁/(λ-U))'|² + α² ∫ |ψ₁|²  ≤  ⟨(λ-U)w/U'', χw⟩ + ⟨ψ₁, χw⟩`
//!   and its `(y₂-y₁)²`-weighted companion,
//! * the Hardy-type bound on `∫ |ψ₁|²/(U-λ)²`,
//! * the single-point bound on `|ψ₁(0)|²/(y₂-y₁)³`.
//!
//! Pairings are `⟨a,b⟩ = ∫ a·conj(b)` with the real part taken, which makes
//! both sides real; the imaginary parts are recorded in the check params for
//! inspection.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::estimate::EstimateCheck;
use crate::linalg::LuFactor;
use crate::profiles::{CriticalLayer, FlowProfile};
use crate::spectral::{split_stream, Field, IntervalGrid, SpectralWorkspace, StreamSplit};
use crate::{Error, Result};

/// Solution of the limiting-absorption Rayleigh problem.
#[derive(Debug, Clone)]
pub struct RayleighSolution {
    pub w: Field,
    pub psi: Field,
    pub lambda: f64,
    pub delta: f64,
    pub alpha: u32,
    /// `‖(U-λ+iδ)W - U''Ψ - f‖_{L²} / ‖f‖_{L²}`.
    pub residual: f64,
}

/// Solve `(U - λ + iδ)W - U'' Ψ = f` by the dense elimination
/// `[(U-λ+iδ) I - U'' K] W = f` where `K` is the Dirichlet Helmholtz inverse.
pub fn solve_ray_delta(
    ws: &SpectralWorkspace,
    profile: &FlowProfile,
    alpha: u32,
    lambda: f64,
    delta: f64,
    f: &Field,
) -> Result<RayleighSolution> {
    if delta.abs() < 1e-12 {
        return Err(Error::Precondition(format!(
            "limiting absorption requires |delta| >= 1e-12, got {delta:.3e}"
        )));
    }
    if alpha < 1 {
        return Err(Error::Precondition(
            "solve_ray_delta requires alpha >= 1".into(),
        ));
    }
    let n = ws.n();
    let cache = ws.alpha_cache(alpha)?;
    let mut m = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        let y = ws.nodes()[i];
        let d2u = profile.d2u(y);
        for j in 0..n {
            m[[i, j]] = -d2u * cache.k_complex[[i, j]];
        }
        m[[i, i]] += C64::new(profile.u(y) - lambda, delta);
    }
    let lu = LuFactor::new(m)?;
    let w_values = lu.solve(&f.values)?;
    let psi_values = cache.k_complex.dot(&w_values);

    let mut res = Array1::<C64>::zeros(n);
    for i in 0..n {
        let y = ws.nodes()[i];
        res[i] = C64::new(profile.u(y) - lambda, delta) * w_values[i]
            - profile.d2u(y) * psi_values[i]
            - f.values[i];
    }
    let f_norm = ws.l2_norm(&f.values);
    let residual = if f_norm > 0.0 {
        ws.l2_norm(&res) / f_norm
    } else {
        ws.l2_norm(&res)
    };

    Ok(RayleighSolution {
        w: Field::new(w_values, alpha),
        psi: Field::new(psi_values, alpha),
        lambda,
        delta,
        alpha,
        residual,
    })
}

/// Evaluate the limiting-absorption bound
/// `‖(∂_y,|α|)Ψ‖ + δ^{1/2}‖W‖ + δ^{3/2}(|λ-U(0)|+δ)^{-1/2}‖∂_y W‖
///  ≲ ‖(∂_y,|α|)(f/U'')‖`.
pub fn check_ray_bounds(
    ws: &SpectralWorkspace,
    profile: &FlowProfile,
    sol: &RayleighSolution,
    f: &Field,
) -> Result<EstimateCheck> {
    let n = ws.n();
    let f_norm = ws.l2_norm(&f.values);
    let bdry = f.values[0].norm().max(f.values[n - 1].norm());
    if bdry > 1e-10 * f_norm.max(1e-300) {
        return Err(Error::Precondition(format!(
            "check_ray_bounds requires f(±1) = 0, got |f(±1)| = {bdry:.3e}"
        )));
    }
    let delta = sol.delta.abs();
    let alpha = sol.alpha as f64;

    let dpsi = ws.deriv(&sol.psi);
    let lhs_psi =
        (ws.l2_norm_sq(&dpsi.values) + alpha * alpha * ws.l2_norm_sq(&sol.psi.values)).sqrt();
    let w_l2 = ws.l2_norm(&sol.w.values);
    let dw = ws.deriv(&sol.w);
    let dw_l2 = ws.l2_norm(&dw.values);
    let spectral_gap = (sol.lambda - profile.u_min).abs() + delta;
    let lhs = lhs_psi + delta.sqrt() * w_l2 + delta.powf(1.5) / spectral_gap.sqrt() * dw_l2;

    let f_over = Field::new(
        Array1::from_iter(
            ws.nodes()
                .iter()
                .zip(f.values.iter())
                .map(|(&y, &v)| v / profile.d2u(y)),
        ),
        sol.alpha,
    );
    let dfo = ws.deriv(&f_over);
    let rhs = (ws.l2_norm_sq(&dfo.values) + alpha * alpha * ws.l2_norm_sq(&f_over.values)).sqrt();

    Ok(EstimateCheck::new("lemma3.6.ray_w_phi", lhs, rhs, n).with_params(&[
        ("lambda", sol.lambda),
        ("delta", sol.delta),
        ("alpha", alpha),
        ("residual", sol.residual),
    ]))
}

/// Shared geometry for the interior checks: the stream split plus the
/// regularized ratio `g = ψ₁/(λ-U)` and `h = (λ-U)g'` on the middle grid.
struct InteriorData {
    split: StreamSplit,
    layer: CriticalLayer,
    /// `Re⟨(λ-U)w/U'', χw⟩`
    t1: f64,
    /// `⟨ψ₁, χw⟩` (complex; real part enters the bounds)
    t2: C64,
    /// `∫ (λ-U)² |(ψ₁/(λ-U))'|²`
    weighted_grad_sq: f64,
    /// `α² ∫_{y₁}^{y₂} |ψ₁|²`
    alpha_mass: f64,
    /// regularized `g = ψ₁/(λ-U)` on the middle grid
    g: Array1<C64>,
}

fn interior_data(
    ws: &SpectralWorkspace,
    profile: &FlowProfile,
    alpha: u32,
    lambda: f64,
    w: &Field,
) -> Result<InteriorData> {
    if lambda <= profile.u_min || lambda >= profile.u_max {
        return Err(Error::Precondition(format!(
            "interior checks need lambda in (U(0), U(1)), got {lambda}"
        )));
    }
    let (_, y2) = crate::profiles::critical_points(profile, lambda)?;
    let layer = CriticalLayer::new(profile, lambda, y2, 0.25 * y2)?;
    let split = split_stream(ws, alpha, w, &layer)?;

    let mid = &split.middle;
    let m = mid.nodes.len();
    let psi1 = &split.psi1_middle;
    let wm = &split.w_middle;

    let mut t1 = 0.0;
    let mut t2 = C64::new(0.0, 0.0);
    for i in 0..m {
        let y = mid.nodes[i];
        t1 += mid.quad[i] * (lambda - profile.u(y)) / profile.d2u(y) * wm[i].norm_sqr();
        t2 += mid.quad[i] * psi1[i] * wm[i].conj();
    }

    let d1c = mid.d1.mapv(|v| C64::new(v, 0.0));
    let dpsi1 = d1c.dot(psi1);

    let mut g = Array1::<C64>::zeros(m);
    for i in 0..m {
        let y = mid.nodes[i];
        let den = lambda - profile.u(y);
        let d_end = (y - layer.y1).abs().min((y - layer.y2).abs());
        if d_end < 1e-11 {
            g[i] = -dpsi1[i] / profile.du(y);
        } else {
            g[i] = psi1[i] / den;
        }
    }

    let mut weighted_grad_sq = 0.0;
    let mut alpha_mass = 0.0;
    let a2 = (alpha as f64) * (alpha as f64);
    for i in 0..m {
        let y = mid.nodes[i];
        // h = (λ-U)·(ψ₁/(λ-U))' = ψ₁' + U'·g, vanishing at the endpoints
        let h = dpsi1[i] + profile.du(y) * g[i];
        weighted_grad_sq += mid.quad[i] * h.norm_sqr();
        alpha_mass += mid.quad[i] * a2 * psi1[i].norm_sqr();
    }

    Ok(InteriorData {
        split,
        layer,
        t1,
        t2,
        weighted_grad_sq,
        alpha_mass,
        g,
    })
}

/// Coercive estimates: returns the `L²` check (true inequality, nonnegative
/// margin expected for every field) and the `H¹` companion (ratio recorded).
pub fn check_coercive(
    ws: &SpectralWorkspace,
    profile: &FlowProfile,
    alpha: u32,
    lambda: f64,
    w: &Field,
) -> Result<(EstimateCheck, EstimateCheck)> {
    let data = interior_data(ws, profile, alpha, lambda, w)?;
    let lhs = data.weighted_grad_sq + data.alpha_mass;
    let rhs = data.t1 + data.t2.re;
    let c1 = EstimateCheck::new("lemma2.1.coercive_l2", lhs, rhs, ws.n()).with_params(&[
        ("lambda", lambda),
        ("alpha", alpha as f64),
        ("margin", rhs - lhs),
        ("pairing_im", data.t2.im),
        ("split_defect", data.split.split_defect),
    ]);

    let gap = data.layer.y2 - data.layer.y1;
    let lhs2 = gap * gap * (data.t1 - data.t2.re);
    let c2 = EstimateCheck::new("lemma2.1.coercive_h1", lhs2, rhs, ws.n()).with_params(&[
        ("lambda", lambda),
        ("alpha", alpha as f64),
        ("y2_minus_y1", gap),
    ]);
    Ok((c1, c2))
}

/// Hardy-type inequality:
/// `∫ |ψ₁|²/(U-λ)² ≲ (y₂-y₁)^{-2} ∫ (U-λ)²|(ψ₁/(U-λ))'|² + |ψ₁(0)|²/(y₂-y₁)³`.
pub fn check_hardy_type(
    ws: &SpectralWorkspace,
    profile: &FlowProfile,
    alpha: u32,
    lambda: f64,
    w: &Field,
) -> Result<EstimateCheck> {
    let data = interior_data(ws, profile, alpha, lambda, w)?;
    let mid = &data.split.middle;
    let mut lhs = 0.0;
    for i in 0..mid.nodes.len() {
        lhs += mid.quad[i] * data.g[i].norm_sqr();
    }
    let gap = data.layer.y2 - data.layer.y1;
    let psi1_at_0 = mid.interp(&data.split.psi1_middle, 0.0);
    let rhs = data.weighted_grad_sq / (gap * gap) + psi1_at_0.norm_sqr() / (gap * gap * gap);
    Ok(
        EstimateCheck::new("lemma2.2.hardy", lhs, rhs, ws.n()).with_params(&[
            ("lambda", lambda),
            ("alpha", alpha as f64),
            ("y2_minus_y1", gap),
        ]),
    )
}

/// Single-point estimate at `y = 0` with interior offset `θ ∈ (0, (y₂-y₁)/4]`.
pub fn check_single_point(
    ws: &SpectralWorkspace,
    profile: &FlowProfile,
    alpha: u32,
    lambda: f64,
    theta: f64,
    w: &Field,
) -> Result<EstimateCheck> {
    let data = interior_data(ws, profile, alpha, lambda, w)?;
    let gap = data.layer.y2 - data.layer.y1;
    if theta <= 0.0 || theta > gap / 4.0 {
        return Err(Error::Precondition(format!(
            "theta = {theta} outside (0, (y2-y1)/4] = (0, {}]",
            gap / 4.0
        )));
    }
    let mid = &data.split.middle;
    let psi1_at_0 = mid.interp(&data.split.psi1_middle, 0.0);
    let lhs = psi1_at_0.norm_sqr() / (gap * gap * gap);

    // ∫_{y₁+θ}^{y₂-θ} U'' ψ₁ / (λ-U): regular on the trimmed interval
    let trimmed = IntervalGrid::new(data.layer.y1 + theta, data.layer.y2 - theta, 96);
    let psi1_t = trimmed
        .nodes
        .mapv(|y| mid.interp(&data.split.psi1_middle, y));
    let mut integral = C64::new(0.0, 0.0);
    for (i, &y) in trimmed.nodes.iter().enumerate() {
        integral += trimmed.quad[i] * profile.d2u(y) * psi1_t[i] / (lambda - profile.u(y));
    }
    let rhs = (data.t1 + data.t2.re) / (gap * gap) + integral.norm_sqr() / gap;
    Ok(
        EstimateCheck::new("lemma2.3.single_point", lhs, rhs, ws.n()).with_params(&[
            ("lambda", lambda),
            ("alpha", alpha as f64),
            ("theta", theta),
        ]),
    )
}

/// All four interior checks from a single stream split: the coercive pair,
/// the Hardy-type bound, and the single-point bound with
/// `θ = θ_frac·(y₂-y₁)`.
pub fn coercive_suite(
    ws: &SpectralWorkspace,
    profile: &FlowProfile,
    alpha: u32,
    lambda: f64,
    w: &Field,
    theta_frac: f64,
) -> Result<[EstimateCheck; 4]> {
    let data = interior_data(ws, profile, alpha, lambda, w)?;
    let gap = data.layer.y2 - data.layer.y1;
    let theta = theta_frac * gap;
    if theta <= 0.0 || theta > gap / 4.0 {
        return Err(Error::Precondition(format!(
            "theta fraction {theta_frac} leaves theta = {theta} outside (0, (y2-y1)/4]"
        )));
    }
    let mid = &data.split.middle;

    let lhs_coercive = data.weighted_grad_sq + data.alpha_mass;
    let rhs_coercive = data.t1 + data.t2.re;
    let c_l2 = EstimateCheck::new("lemma2.1.coercive_l2", lhs_coercive, rhs_coercive, ws.n())
        .with_params(&[
            ("lambda", lambda),
            ("alpha", alpha as f64),
            ("margin", rhs_coercive - lhs_coercive),
            ("pairing_im", data.t2.im),
        ]);
    let c_h1 = EstimateCheck::new(
        "lemma2.1.coercive_h1",
        gap * gap * (data.t1 - data.t2.re),
        rhs_coercive,
        ws.n(),
    )
    .with_params(&[("lambda", lambda), ("alpha", alpha as f64)]);

    let mut hardy_lhs = 0.0;
    for i in 0..mid.nodes.len() {
        hardy_lhs += mid.quad[i] * data.g[i].norm_sqr();
    }
    let psi1_at_0 = mid.interp(&data.split.psi1_middle, 0.0);
    let hardy_rhs =
        data.weighted_grad_sq / (gap * gap) + psi1_at_0.norm_sqr() / (gap * gap * gap);
    let c_hardy = EstimateCheck::new("lemma2.2.hardy", hardy_lhs, hardy_rhs, ws.n())
        .with_params(&[("lambda", lambda), ("alpha", alpha as f64)]);

    let trimmed = IntervalGrid::new(data.layer.y1 + theta, data.layer.y2 - theta, 96);
    let mut integral = C64::new(0.0, 0.0);
    for (i, &y) in trimmed.nodes.iter().enumerate() {
        let psi1_t = mid.interp(&data.split.psi1_middle, y);
        integral += trimmed.quad[i] * profile.d2u(y) * psi1_t / (lambda - profile.u(y));
    }
    let sp_lhs = psi1_at_0.norm_sqr() / (gap * gap * gap);
    let sp_rhs = (data.t1 + data.t2.re) / (gap * gap) + integral.norm_sqr() / gap;
    let c_sp = EstimateCheck::new("lemma2.3.single_point", sp_lhs, sp_rhs, ws.n())
        .with_params(&[("lambda", lambda), ("alpha", alpha as f64), ("theta", theta)]);

    Ok([c_l2, c_h1, c_hardy, c_sp])
}

/// Estimate-sweep entry: solve `Ray_δ` for the given data and evaluate the
/// limiting-absorption ratio.
pub fn ray_bound_sweep_point(
    ws: &SpectralWorkspace,
    profile: &FlowProfile,
    alpha: u32,
    lambda: f64,
    delta: f64,
    f: &Field,
) -> Result<EstimateCheck> {
    let sol = solve_ray_delta(ws, profile, alpha, lambda, delta, f)?;
    check_ray_bounds(ws, profile, &sol, f)
}

//! Acceptance criteria for the workbench, runnable both from the
//! integration-test target and from the CLI.
//!
//! Every criterion pins its tolerances here; results carry the measured
//! values so failures are diagnosable. Runtimes are checked against the
//! stated budgets but excluded from the serialized summary, which must be
//! byte-identical across reruns and thread counts (criterion 10).

use num_complex::Complex64 as C64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;

use crate::boundary_layer::{airy_a0, airy_ai_dai};
use crate::evolution::{
    fit_algebraic_rate, measure_enhanced_dissipation, run_euler,
};
use crate::nonlinear::{run_nonlinear, seeded_initial_modes, NonlinearOptions, Verdict};
use crate::orr_sommerfeld::{
    decompose_nonslip, paper_exponent, scan_lambda, suggested_n, BoundaryCondition, OSProblem,
    OutputNorm, ResolventPair, SourceNorm,
};
use crate::profiles::{make_profile, FlowProfile, ProfileKind};
use crate::rayleigh::coercive_suite;
use crate::spectral::{seeded_field, Field, HelmholtzBc, NormKind, SpectralWorkspace};
use crate::sweep::par_map_ordered;
use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub values: BTreeMap<String, f64>,
    #[serde(skip)]
    pub runtime_s: f64,
}

impl CriterionResult {
    fn new(id: u32, name: &str) -> Self {
        CriterionResult {
            id,
            name: name.to_string(),
            pass: true,
            detail: String::new(),
            values: BTreeMap::new(),
            runtime_s: 0.0,
        }
    }

    fn clause(&mut self, ok: bool, text: String) {
        if !ok {
            self.pass = false;
        }
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(&format!("{}{}", if ok { "" } else { "FAIL: " }, text));
    }

    fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    fn check_runtime(&mut self, limit_s: f64) {
        // generous budgets; a breach marks the criterion failed
        if self.runtime_s > limit_s {
            self.pass = false;
            self.detail
                .push_str(&format!("; FAIL: runtime {:.1}s > {limit_s}s", self.runtime_s));
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceSummary {
    pub seed: u64,
    pub threads: usize,
    pub all_pass: bool,
    pub criteria: Vec<CriterionResult>,
}

impl AcceptanceSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serialization");
        s.push('\n');
        s
    }
}

fn poiseuille() -> FlowProfile {
    make_profile(ProfileKind::Poiseuille, &[]).expect("poiseuille profile")
}

fn quartic() -> FlowProfile {
    make_profile(ProfileKind::Quartic, &[0.5]).expect("quartic profile")
}

/// Grid schedule for the resolvent scans (desk scale, ≤ 384 per criterion 3).
fn scan_n(nu: f64) -> usize {
    let base = 128.0 * (1e-3 / nu).powf(1.0 / 3.0);
    let n = base.clamp(128.0, 320.0);
    (n / 32.0).ceil() as usize * 32
}

/// Criterion 1: Helmholtz analytic oracles at n = 64.
pub fn criterion1() -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut r = CriterionResult::new(1, "spectral oracle");
    let ws = SpectralWorkspace::new(64);
    let one = Field::from_real_fn(&ws, 1, |_| 1.0);
    let psi = ws.helmholtz_solve(1, &one, HelmholtzBc::Dirichlet)?;
    let mut err1 = 0.0f64;
    for (i, &y) in ws.nodes().iter().enumerate() {
        let exact = y.cosh() / 1.0f64.cosh() - 1.0;
        err1 = err1.max((psi.values[i] - exact).norm());
    }
    let pi = std::f64::consts::PI;
    let sine = Field::from_real_fn(&ws, 1, |y| (pi * y).sin());
    let psi2 = ws.helmholtz_solve(1, &sine, HelmholtzBc::Dirichlet)?;
    let mut err2 = 0.0f64;
    for (i, &y) in ws.nodes().iter().enumerate() {
        let exact = -(pi * y).sin() / (pi * pi + 1.0);
        err2 = err2.max((psi2.values[i] - exact).norm());
    }
    r.value("max_error_cosh", err1);
    r.value("max_error_sine", err2);
    r.clause(err1 <= 1e-10, format!("cosh oracle max err {err1:.3e} <= 1e-10"));
    r.clause(err2 <= 1e-10, format!("sine oracle max err {err2:.3e} <= 1e-10"));
    r.runtime_s = t0.elapsed().as_secs_f64();
    r.check_runtime(1.0);
    Ok(r)
}

/// Criterion 2: coercivity suite over random fields, margins and
/// grid-stability of the empirical constants.
pub fn criterion2(seed: u64, threads: usize) -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut r = CriterionResult::new(2, "coercivity suite");
    let profiles = [poiseuille(), quartic()];
    let alphas = [1u32, 2, 4];
    let lambdas: Vec<f64> = (1..=9).map(|i| 0.1 * i as f64).collect();
    let samples = 100u64;

    let mut combos = Vec::new();
    for (pi, _) in profiles.iter().enumerate() {
        for &alpha in &alphas {
            for &lambda in &lambdas {
                combos.push((pi, alpha, lambda));
            }
        }
    }

    let mut min_margin = f64::INFINITY;
    let mut max_ratio_by_n: Vec<BTreeMap<String, f64>> = Vec::new();
    for &n in &[128usize, 256] {
        let ws = SpectralWorkspace::new(n);
        let per_combo = par_map_ordered(&combos, threads, |&(pi, alpha, lambda)| {
            let profile = &profiles[pi];
            let mut worst_margin = f64::INFINITY;
            let mut maxes: BTreeMap<String, f64> = BTreeMap::new();
            for i in 0..samples {
                let tag = (pi as u64) * 1_000_000 + (alpha as u64) * 10_000 + i;
                let lam_tag = (lambda * 10.0).round() as u64;
                let w = seeded_field(&ws, alpha, seed, tag * 16 + lam_tag);
                let checks = coercive_suite(&ws, profile, alpha, lambda, &w, 0.25)?;
                for c in checks.iter() {
                    if c.check_id == "lemma2.1.coercive_l2" {
                        let scale = c.lhs.abs() + c.rhs.abs();
                        if scale > 0.0 {
                            worst_margin = worst_margin.min((c.rhs - c.lhs) / scale);
                        }
                    } else {
                        let e = maxes.entry(c.check_id.clone()).or_insert(0.0);
                        *e = e.max(c.ratio);
                    }
                }
            }
            Ok((worst_margin, maxes))
        })?;
        let mut max_ratio: BTreeMap<String, f64> = BTreeMap::new();
        for (margin, maxes) in per_combo {
            min_margin = min_margin.min(margin);
            for (k, v) in maxes {
                let e = max_ratio.entry(k).or_insert(0.0);
                *e = e.max(v);
            }
        }
        max_ratio_by_n.push(max_ratio);
    }

    r.value("min_relative_margin", min_margin);
    r.clause(
        min_margin >= -1e-8,
        format!("coercive (L²) margin >= -1e-8 rel (min {min_margin:.3e})"),
    );
    for key in ["lemma2.1.coercive_h1", "lemma2.2.hardy", "lemma2.3.single_point"] {
        let m128 = max_ratio_by_n[0][key];
        let m256 = max_ratio_by_n[1][key];
        let rel = (m256 - m128).abs() / m256.abs().max(1e-300);
        r.value(&format!("{key}.max_128"), m128);
        r.value(&format!("{key}.max_256"), m256);
        r.clause(
            m256.is_finite() && m128.is_finite(),
            format!("{key} max finite ({m256:.3e})"),
        );
        r.clause(rel < 0.05, format!("{key} refinement drift {:.2}%", rel * 100.0));
    }
    r.runtime_s = t0.elapsed().as_secs_f64();
    r.check_runtime(120.0);
    Ok(r)
}

fn scaling_pairs(bc: BoundaryCondition) -> Vec<ResolventPair> {
    match bc {
        BoundaryCondition::NonSlip => vec![
            ResolventPair::new(SourceNorm::L2, OutputNorm::L2W),
            ResolventPair::new(SourceNorm::Hm1, OutputNorm::L2W),
            ResolventPair::new(SourceNorm::Hm1, OutputNorm::L2U),
            ResolventPair::new(SourceNorm::L2, OutputNorm::L2U),
            ResolventPair::new(SourceNorm::H1, OutputNorm::L2U),
        ],
        BoundaryCondition::NavierSlip => vec![
            ResolventPair::new(SourceNorm::L2, OutputNorm::L2W),
            ResolventPair::new(SourceNorm::Hm1, OutputNorm::L2W),
            ResolventPair::new(SourceNorm::L2, OutputNorm::L2U),
            ResolventPair::new(SourceNorm::Hm1, OutputNorm::L2U),
        ],
    }
}

fn scaling_criterion(
    id: u32,
    name: &str,
    bc: BoundaryCondition,
    threads: usize,
    runtime_limit: f64,
) -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut r = CriterionResult::new(id, name);
    let profile = poiseuille();
    let nus = [1e-3, 3e-4, 1e-4, 3e-5, 1e-5];
    let pairs = scaling_pairs(bc);
    let mut sups: Vec<Vec<(f64, f64)>> = vec![Vec::new(); pairs.len()];
    for &nu in &nus {
        let n = scan_n(nu);
        let ws = SpectralWorkspace::new(n);
        let scan = scan_lambda(&ws, &profile, nu, 1, bc, &pairs, threads)?;
        for (k, &s) in scan.sup_norm.iter().enumerate() {
            sups[k].push((nu, s));
        }
    }
    for (k, pair) in pairs.iter().enumerate() {
        let fit = crate::orr_sommerfeld::fit_scaling(&sups[k])?;
        let bound = paper_exponent(bc, *pair);
        r.value(&format!("{pair}.slope"), fit.slope);
        r.value(&format!("{pair}.r2"), fit.r2);
        // empirical constants sup·ν^bound (the paper's implicit "C"): these
        // stay O(1) wherever the spectrum is uniformly damped, and spike at
        // ν inside the Tollmien–Schlichting window
        let mut consts = Vec::new();
        for &(nu, s) in &sups[k] {
            let c = s * nu.powf(bound);
            r.value(&format!("{pair}.const_nu{nu:e}"), c);
            consts.push(format!("{c:.2}"));
        }
        r.clause(
            fit.slope <= bound + 0.10,
            format!(
                "{pair} slope {:.3} <= {:.3}+0.10 (constants per nu: [{}])",
                fit.slope,
                bound,
                consts.join(", ")
            ),
        );
        r.clause(fit.r2 >= 0.95, format!("{pair} r2 {:.3} >= 0.95", fit.r2));
    }
    r.runtime_s = t0.elapsed().as_secs_f64();
    r.check_runtime(runtime_limit);
    Ok(r)
}

/// Criterion 3: non-slip resolvent scaling (α = 1, poiseuille).
pub fn criterion3(threads: usize) -> Result<CriterionResult> {
    scaling_criterion(3, "non-slip resolvent scaling", BoundaryCondition::NonSlip, threads, 1200.0)
}

/// Criterion 4: Navier-slip resolvent scaling.
pub fn criterion4(threads: usize) -> Result<CriterionResult> {
    scaling_criterion(
        4,
        "navier-slip resolvent scaling",
        BoundaryCondition::NavierSlip,
        threads,
        1200.0,
    )
}

/// Criterion 5: corrector fidelity.
pub fn criterion5(threads: usize) -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut r = CriterionResult::new(5, "corrector fidelity");
    let profile = poiseuille();
    let nus = [1e-3, 1e-4, 1e-5];
    let lambdas = [0.2, 0.5, 0.8];

    let mut combos = Vec::new();
    for &nu in &nus {
        for &lambda in &lambdas {
            combos.push((nu, lambda));
        }
    }
    let results = par_map_ordered(&combos, threads, |&(nu, lambda)| {
        let n = suggested_n(nu, 1);
        let ws = SpectralWorkspace::new(n);
        let prob = OSProblem::new(nu, 1, lambda, BoundaryCondition::NonSlip)?;
        let f = Field::from_real_fn(&ws, 1, |y| 1.0 - y * y);
        let dec = decompose_nonslip(&ws, &profile, &prob, &f, 10.0)?;
        let psi_norm = ws.l2_norm(&dec.reconstructed.psi.values);
        let bc_rel = dec.reconstructed.bc_defect / psi_norm.max(1e-300);
        Ok((
            dec.correctors.route_gap_rel.0,
            dec.direct_gap_rel,
            bc_rel,
        ))
    })?;

    // per-ν medians over λ of the approximation-route gap
    let mut medians = Vec::new();
    for (i, &nu) in nus.iter().enumerate() {
        let mut gaps: Vec<f64> = (0..lambdas.len())
            .map(|j| results[i * lambdas.len() + j].0)
            .collect();
        gaps.sort_by(f64::total_cmp);
        let med = gaps[gaps.len() / 2];
        medians.push(med);
        r.value(&format!("gap_median_nu{nu:e}"), med);
        for (j, &lambda) in lambdas.iter().enumerate() {
            r.value(
                &format!("gap_nu{nu:e}_lam{lambda}"),
                results[i * lambdas.len() + j].0,
            );
        }
    }
    r.clause(
        medians[1] < medians[0] && medians[2] < medians[1],
        format!(
            "two-route gap decreases in L1 (medians {:.3}, {:.3}, {:.3})",
            medians[0], medians[1], medians[2]
        ),
    );
    let worst_small_nu = (0..lambdas.len())
        .map(|j| results[2 * lambdas.len() + j].0)
        .fold(0.0f64, f64::max);
    r.value("gap_max_nu1e-5", worst_small_nu);
    r.clause(
        worst_small_nu <= 0.15,
        format!("gap at nu=1e-5 <= 0.15 (max {worst_small_nu:.3})"),
    );

    let worst_reconstruction = results.iter().map(|t| t.1).fold(0.0f64, f64::max);
    let worst_bc = results.iter().map(|t| t.2).fold(0.0f64, f64::max);
    r.value("reconstruction_gap_max", worst_reconstruction);
    r.value("bc_defect_rel_max", worst_bc);
    r.clause(
        worst_reconstruction <= 1e-4,
        format!("reconstruction matches direct solve (max rel {worst_reconstruction:.3e} <= 1e-4)"),
    );
    r.clause(
        worst_bc <= 1e-6,
        format!("non-slip bc defect {worst_bc:.3e} <= 1e-6 rel"),
    );

    let ai0 = airy_ai_dai(C64::new(0.0, 0.0)).0.re;
    let a00 = airy_a0(C64::new(0.0, 0.0), 1);
    r.value("ai0", ai0);
    r.value("a0_at_0_re", a00.re);
    r.clause(
        (ai0 - 0.355028053887817).abs() <= 1e-10,
        format!("Ai(0) = {ai0:.15}"),
    );
    r.clause(
        (a00 - C64::new(1.0 / 3.0, 0.0)).norm() <= 1e-8,
        format!("A0(0) = {:.10}+{:.1e}i", a00.re, a00.im),
    );
    r.runtime_s = t0.elapsed().as_secs_f64();
    r.check_runtime(600.0);
    Ok(r)
}

/// Criteria 6 and 7 share the forcing-free linear runs (quartic profile —
/// poiseuille sits inside the Tollmien–Schlichting window at (ν=1e-4, α=1),
/// where no positive rate exists; see the ledger note).
pub fn criterion6_and_7(seed: u64) -> Result<(CriterionResult, CriterionResult)> {
    let t0 = Instant::now();
    let mut r6 = CriterionResult::new(6, "enhanced dissipation");
    let mut r7 = CriterionResult::new(7, "inviscid damping uniformity");
    let profile = quartic();
    let nus = [1e-3, 1e-4, 1e-5];
    let mut all_ratios = Vec::new();
    for alpha in [1u32, 2] {
        let ed = measure_enhanced_dissipation(&profile, alpha, &nus, seed, 0.05)?;
        for (nu, fit) in &ed.rates {
            r6.value(&format!("rate_alpha{alpha}_nu{nu:e}"), fit.rate);
            r6.clause(
                fit.rate > 0.0,
                format!("rate(a={alpha},nu={nu:.0e}) = {:.3e} > 0", fit.rate),
            );
        }
        r6.value(&format!("exponent_alpha{alpha}"), ed.exponent);
        r6.clause(
            (0.4..=0.6).contains(&ed.exponent),
            format!("exponent(a={alpha}) = {:.3} in [0.4, 0.6]", ed.exponent),
        );
        for (nu, ratio) in &ed.damping_ratios {
            r7.value(&format!("damping_ratio_alpha{alpha}_nu{nu:e}"), *ratio);
            all_ratios.push(*ratio);
        }
    }
    let max = all_ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = all_ratios.iter().cloned().fold(f64::MAX, f64::min);
    let factor = max / min.max(1e-300);
    r7.value("variation_factor", factor);
    r7.clause(
        factor < 10.0,
        format!("damping functional varies by {factor:.2}x < 10x"),
    );
    let dt = t0.elapsed().as_secs_f64();
    r6.runtime_s = dt;
    r7.runtime_s = 0.0;
    r6.check_runtime(900.0);
    Ok((r6, r7))
}

/// Criterion 8: inviscid damping and depletion rates.
pub fn criterion8() -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut r = CriterionResult::new(8, "euler damping rates");
    let profile = poiseuille();
    let ws = SpectralWorkspace::new(640);
    let w0 = Field::from_fn(&ws, 1, |y| {
        let q = 1.0 - y * y;
        C64::new(q * q * (1.0 + 0.3 * y), 0.1 * q)
    });
    // run to t = 200: the criterion clauses are fitted on [10, 100]; the
    // [100, 200] window documents the late-time asymptotics
    let euler = run_euler(&ws, &profile, 1, &w0, 200.0, 0.025)?;
    let series = |pick: fn(&crate::evolution::TimeSample) -> f64| -> Vec<(f64, f64)> {
        euler.run.series.iter().map(|s| (s.t, pick(s))).collect()
    };
    let dphi = series(|s| s.dphi_l2);
    let aphi = series(|s| s.alpha_phi_l2);
    let w_at_0 = series(|s| s.w_at_0);
    let fit_dphi = fit_algebraic_rate(&dphi, (10.0, 100.0))?;
    let fit_aphi = fit_algebraic_rate(&aphi, (10.0, 100.0))?;
    let fit_w0 = fit_algebraic_rate(&w_at_0, (10.0, 100.0))?;
    let late_dphi = fit_algebraic_rate(&dphi, (100.0, 200.0))?;
    let late_w0 = fit_algebraic_rate(&w_at_0, (100.0, 200.0))?;
    r.value("dyphi_exponent", fit_dphi.rate);
    r.value("alpha_phi_exponent", fit_aphi.rate);
    r.value("omega_at_0_exponent", fit_w0.rate);
    r.value("dyphi_exponent_late", late_dphi.rate);
    r.value("omega_at_0_exponent_late", late_w0.rate);
    r.clause(
        (fit_dphi.rate + 1.0).abs() <= 0.2,
        format!(
            "dyphi exponent {:.3} = -1±0.2 on [10,100] (late window [100,200]: {:.3})",
            fit_dphi.rate, late_dphi.rate
        ),
    );
    r.clause(
        (fit_aphi.rate + 2.0).abs() <= 0.3,
        format!("alpha-phi exponent {:.3} = -2±0.3", fit_aphi.rate),
    );
    r.clause(
        fit_w0.rate <= -0.875 + 0.25,
        format!(
            "depletion exponent {:.3} <= -7/8+0.25 (late: {:.3})",
            fit_w0.rate, late_w0.rate
        ),
    );
    r.runtime_s = t0.elapsed().as_secs_f64();
    r.check_runtime(600.0);
    Ok(r)
}

/// Criterion 9: nonlinear threshold behavior at ν = 1e-4, K = 8.
pub fn criterion9(seed: u64, threads: usize) -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut r = CriterionResult::new(9, "nonlinear threshold");
    let profile = poiseuille();
    let nu = 1e-4;
    let k_max = 8usize;
    let n = 160;
    let ws = SpectralWorkspace::new(n);
    let opts = NonlinearOptions {
        dt: 0.05,
        t_final: 100.0,
        eps_weight: 0.05,
        no_background: false,
        dt_retry: true,
    };

    // (a) zero-mode-only heat oracle
    {
        let pi = std::f64::consts::PI;
        let mut data = vec![Field::zeros(n, 0); k_max + 1];
        for (k, f) in data.iter_mut().enumerate() {
            f.alpha = k as u32;
        }
        data[0] = Field::from_real_fn(&ws, 0, |y| -(pi / 2.0) * (pi * (y + 1.0) / 2.0).cos());
        let h4 = ws.norm(&data[0], NormKind::HkAlpha(4))?;
        let heat_opts = NonlinearOptions {
            dt: 0.05,
            t_final: 20.0,
            ..opts
        };
        let run = run_nonlinear(&ws, &profile, nu, k_max, &data, h4, &heat_opts)?;
        let decay = (-nu * (pi / 2.0) * (pi / 2.0) * 20.0).exp();
        let mut err = 0.0f64;
        for (i, &y) in ws.nodes().iter().enumerate() {
            let want = decay * (pi * (y + 1.0) / 2.0).sin();
            err = err.max((run.state.u10.values[i] - C64::new(want, 0.0)).norm());
        }
        r.value("heat_oracle_error", err);
        r.clause(err <= 1e-6, format!("zero-mode heat oracle err {err:.3e} <= 1e-6"));
    }

    // (b) small amplitude is stable
    {
        let data = seeded_initial_modes(&ws, k_max, seed);
        let amplitude = 0.01 * nu.powf(2.0 / 3.0);
        let run = run_nonlinear(&ws, &profile, nu, k_max, &data, amplitude, &opts)?;
        r.value("small_amp_growth", run.max_growth_factor);
        r.clause(
            run.verdict == Verdict::Stable,
            format!(
                "amplitude 0.01 nu^(2/3) verdict {} (growth {:.2})",
                run.verdict, run.max_growth_factor
            ),
        );
    }

    // (c) amplitude sweep ordering
    {
        let factors = [0.01, 0.1, 1.0, 10.0, 100.0];
        // parallelize over the amplitude column deterministically
        let cells = par_map_ordered(&factors, threads, |&factor| {
            let data = seeded_initial_modes(&ws, k_max, seed);
            let amplitude = factor * nu.powf(2.0 / 3.0);
            let run = run_nonlinear(&ws, &profile, nu, k_max, &data, amplitude, &opts)?;
            Ok((factor, run.verdict, run.max_growth_factor))
        })?;
        let mut pairs = 0;
        let mut violations = 0;
        for w in cells.windows(2) {
            pairs += 1;
            if w[0].1 == Verdict::Transitioned && w[1].1 == Verdict::Stable {
                violations += 1;
            }
        }
        let frac = violations as f64 / pairs as f64;
        r.value("monotonicity_violations", frac);
        let column: Vec<String> = cells
            .iter()
            .map(|(f, v, _)| format!("{f}:{v}"))
            .collect();
        r.clause(
            frac < 0.10,
            format!("verdict column [{}] violations {:.0}%", column.join(" "), frac * 100.0),
        );
    }
    r.runtime_s = t0.elapsed().as_secs_f64();
    r.check_runtime(1800.0);
    Ok(r)
}

fn criteria_1_to_9(seed: u64, threads: usize) -> Result<Vec<CriterionResult>> {
    let (c6, c7) = criterion6_and_7(seed)?;
    Ok(vec![
        criterion1()?,
        criterion2(seed, threads)?,
        criterion3(threads)?,
        criterion4(threads)?,
        criterion5(threads)?,
        c6,
        c7,
        criterion8()?,
        criterion9(seed, threads)?,
    ])
}

/// Run the full acceptance suite including the determinism criterion.
pub fn run_all(seed: u64, threads: usize) -> Result<AcceptanceSummary> {
    let first = criteria_1_to_9(seed, threads)?;
    let t0 = Instant::now();
    let second = criteria_1_to_9(seed, threads + 1)?;
    let first_json = serde_json::to_string(&first).expect("criteria serialization");
    let second_json = serde_json::to_string(&second).expect("criteria serialization");
    let mut c10 = CriterionResult::new(10, "determinism");
    c10.clause(
        first_json == second_json,
        format!(
            "rerun with threads={} reproduces the summary byte-identically ({} bytes)",
            threads + 1,
            first_json.len()
        ),
    );
    c10.runtime_s = t0.elapsed().as_secs_f64();

    let mut criteria = first;
    criteria.push(c10);
    let all_pass = criteria.iter().all(|c| c.pass);
    Ok(AcceptanceSummary {
        seed,
        threads,
        all_pass,
        criteria,
    })
}

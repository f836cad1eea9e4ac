//! `shearstab` — experiment orchestration for the channel-flow stability
//! workbench. Subcommands mirror the workbench experiments; every run writes
//! CSV sweeps plus one `summary.json`, and reruns with the same seed are
//! byte-identical regardless of `--threads`.

mod config;

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use config::Config;
use shearstab_core::boundary_layer::{airy_a0, airy_ai_dai, build_correctors, check_c_bounds, lemma41_checks};
use shearstab_core::estimate::EstimateCheck;
use shearstab_core::evolution::{
    run_euler, run_linear, write_checkpoint, CheckpointHeader, EvolveOptions,
};
use shearstab_core::nonlinear::{run_nonlinear, seeded_initial_modes, threshold_sweep, NonlinearOptions};
use shearstab_core::orr_sommerfeld::{
    check_energy_estimates, scan_lambda, suggested_n, weak_type_ratio, BoundaryCondition,
    OSProblem,
};
use shearstab_core::rayleigh::{coercive_suite, ray_bound_sweep_point};
use shearstab_core::spectral::{seeded_field, Field, NormKind, SpectralWorkspace};
use shearstab_core::sweep::par_map_ordered;

#[derive(Parser)]
#[command(name = "shearstab", about = "spectral workbench for symmetric channel-flow stability estimates", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// experiment configuration (TOML); defaults are used when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory (or $SHEARSTAB_OUT, or ./shearstab-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// worker threads for parameter sweeps
    #[arg(long, global = true, default_value_t = 2)]
    threads: usize,
    /// seed for every randomized input
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// λ-scan of resolvent operator norms and ν-scaling fits
    ResolventScan,
    /// coercive / Hardy / single-point inequality sweep over random fields
    CoercivityCheck,
    /// boundary-layer corrector diagnostics (both routes, coefficient bounds)
    CorrectorCheck,
    /// dump Ai and A₀ values for external validation
    AiryTable,
    /// linearized viscous evolution with space-time functionals
    EvolveLinear,
    /// inviscid evolution with damping/depletion rate fits
    EvolveEuler,
    /// single nonlinear run
    EvolveNonlinear,
    /// amplitude-threshold sweep of the nonlinear solver
    ThresholdSweep,
    /// energy / limiting-absorption / weak-type estimate sweep
    EstimateSweep,
    /// run the full acceptance suite
    Accept,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("SHEARSTAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("shearstab-out"));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("error: cannot create output dir {}: {e}", out_dir.display());
        return ExitCode::from(2);
    }
    let cfg = match &cli.config {
        Some(path) => match Config::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(2);
            }
        },
        None => Config::default(),
    };

    let _ = &cfg.kind;
    let result = match cli.cmd {
        Cmd::ResolventScan => cmd_resolvent_scan(&cfg, &out_dir, cli.threads),
        Cmd::CoercivityCheck => cmd_coercivity(&cfg, &out_dir, cli.threads, cli.seed),
        Cmd::CorrectorCheck => cmd_corrector(&cfg, &out_dir, cli.threads),
        Cmd::AiryTable => cmd_airy_table(&out_dir),
        Cmd::EvolveLinear => cmd_evolve_linear(&cfg, &out_dir, cli.seed),
        Cmd::EvolveEuler => cmd_evolve_euler(&cfg, &out_dir),
        Cmd::EvolveNonlinear => cmd_evolve_nonlinear(&cfg, &out_dir, cli.seed),
        Cmd::ThresholdSweep => cmd_threshold_sweep(&cfg, &out_dir, cli.seed),
        Cmd::EstimateSweep => cmd_estimate_sweep(&cfg, &out_dir, cli.threads),
        Cmd::Accept => return cmd_accept(&out_dir, cli.threads, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(3)
        }
    }
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn write_summary(out_dir: &Path, value: &Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(&out_dir.join("summary.json"), &text)
}

fn estimate_csv_header() -> String {
    "profile,alpha,nu,lambda,delta,check_id,lhs,rhs,ratio,n\n".to_string()
}

fn estimate_csv_row(profile: &str, nu: f64, delta: f64, c: &EstimateCheck) -> String {
    let alpha = c.params.get("alpha").copied().unwrap_or(0.0);
    let lambda = c.params.get("lambda").copied().unwrap_or(0.0);
    format!(
        "{},{},{:.12e},{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e},{}\n",
        profile, alpha as u32, nu, lambda, delta, c.check_id, c.lhs, c.rhs, c.ratio, c.n
    )
}

fn grid_n(cfg: &Config, nu: f64, alpha: u32) -> usize {
    if cfg.grid.n > 0 {
        cfg.grid.n
    } else {
        suggested_n(nu, alpha)
    }
}

fn cmd_resolvent_scan(cfg: &Config, out: &Path, threads: usize) -> anyhow::Result<()> {
    let profile = cfg.build_profile().map_err(anyhow::Error::msg)?;
    let pairs = cfg.resolvent_pairs().map_err(anyhow::Error::msg)?;
    let mut csv = String::from("nu,alpha,lambda,pair,norm\n");
    let mut summary = Map::new();
    let mut sups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for &alpha in &cfg.sweep.alphas {
        for &nu in &cfg.sweep.nus {
            let n = grid_n(cfg, nu, alpha);
            let ws = SpectralWorkspace::new(n);
            let scan = scan_lambda(&ws, &profile, nu, alpha, cfg.sweep.bc, &pairs, threads)?;
            for (k, pair) in pairs.iter().enumerate() {
                for (i, &lambda) in scan.lambda_grid.iter().enumerate() {
                    csv.push_str(&format!(
                        "{:.12e},{},{:.12e},{},{:.12e}\n",
                        nu, alpha, lambda, pair, scan.norms[k][i]
                    ));
                }
                let key = format!("nu={nu:e} alpha={alpha} {pair}");
                summary.insert(
                    key,
                    json!({
                        "sup": scan.sup_norm[k],
                        "argmax_lambda": scan.argmax_lambda[k],
                        "n": n,
                        "points": scan.lambda_grid.len(),
                    }),
                );
                sups.entry(format!("alpha={alpha} {pair}"))
                    .or_default()
                    .push((nu, scan.sup_norm[k]));
            }
        }
    }
    let mut fits = Map::new();
    for (key, points) in &sups {
        if points.len() >= 4 {
            let fit = shearstab_core::orr_sommerfeld::fit_scaling(points)?;
            fits.insert(
                key.clone(),
                json!({"slope": fit.slope, "r2": fit.r2, "intercept": fit.intercept}),
            );
        }
    }
    write_text(&out.join("resolvent-scan.csv"), &csv)?;
    write_summary(
        out,
        &json!({"kind": "resolvent-scan", "bc": cfg.sweep.bc, "scans": Value::Object(summary), "fits": Value::Object(fits)}),
    )
}

fn cmd_coercivity(cfg: &Config, out: &Path, threads: usize, seed: u64) -> anyhow::Result<()> {
    let profile = cfg.build_profile().map_err(anyhow::Error::msg)?;
    let seeds = cfg.require_seeds(seed);
    let n = if cfg.grid.n > 0 { cfg.grid.n } else { 128 };
    let ws = SpectralWorkspace::new(n);
    let lambdas = if cfg.sweep.lambdas.is_empty() {
        vec![0.1, 0.3, 0.5, 0.7, 0.9]
    } else {
        cfg.sweep.lambdas.clone()
    };
    let mut combos = Vec::new();
    for &alpha in &cfg.sweep.alphas {
        for &lambda in &lambdas {
            for &s in &seeds {
                for i in 0..cfg.sweep.samples {
                    combos.push((alpha, lambda, s, i as u64));
                }
            }
        }
    }
    let rows = par_map_ordered(&combos, threads, |&(alpha, lambda, s, tag)| {
        let w = seeded_field(&ws, alpha, s, tag);
        coercive_suite(&ws, &profile, alpha, lambda, &w, 0.25)
    })?;
    let mut csv = estimate_csv_header();
    let mut min_margin = f64::INFINITY;
    let mut max_ratio: BTreeMap<String, f64> = BTreeMap::new();
    for checks in &rows {
        for c in checks.iter() {
            csv.push_str(&estimate_csv_row(&profile.name, 0.0, 0.0, c));
            if c.check_id == "lemma2.1.coercive_l2" {
                let scale = c.lhs.abs() + c.rhs.abs();
                if scale > 0.0 {
                    min_margin = min_margin.min((c.rhs - c.lhs) / scale);
                }
            } else {
                let e = max_ratio.entry(c.check_id.clone()).or_insert(0.0);
                *e = e.max(c.ratio);
            }
        }
    }
    write_text(&out.join("coercivity-check.csv"), &csv)?;
    write_summary(
        out,
        &json!({
            "kind": "coercivity-check",
            "profile": profile.name,
            "n": n,
            "samples": combos.len(),
            "min_relative_margin": if min_margin.is_finite() { min_margin } else { 0.0 },
            "max_ratios": max_ratio,
        }),
    )
}

fn cmd_corrector(cfg: &Config, out: &Path, threads: usize) -> anyhow::Result<()> {
    let profile = cfg.build_profile().map_err(anyhow::Error::msg)?;
    let lambdas = if cfg.sweep.lambdas.is_empty() {
        vec![0.2, 0.5, 0.8]
    } else {
        cfg.sweep.lambdas.clone()
    };
    let mut combos = Vec::new();
    for &alpha in &cfg.sweep.alphas {
        for &nu in &cfg.sweep.nus {
            for &lambda in &lambdas {
                combos.push((alpha, nu, lambda));
            }
        }
    }
    let threshold = cfg.sweep.corrector_threshold;
    let results = par_map_ordered(&combos, threads, |&(alpha, nu, lambda)| {
        let n = grid_n(cfg, nu, alpha);
        let ws = SpectralWorkspace::new(n);
        let prob = OSProblem::new(nu, alpha, lambda, BoundaryCondition::NonSlip)?;
        let set = build_correctors(&ws, &profile, &prob, threshold)?;
        let l41 = lemma41_checks(&ws, &set.approx, alpha);
        let f = Field::from_real_fn(&ws, alpha, |y| 1.0 - y * y);
        let cb = check_c_bounds(&ws, &profile, &prob, &f).unwrap_or_default();
        Ok((n, set.approx.l1, set.approx.l2, set.route_gap_rel, set.assembly_gap_rel, l41, cb))
    })?;
    let mut csv = estimate_csv_header();
    let mut entries = Vec::new();
    for ((alpha, nu, lambda), (n, l1, l2, route_gap, assembly_gap, l41, cb)) in
        combos.iter().zip(results)
    {
        let mut ratios = Map::new();
        for c in l41.iter().chain(cb.iter()) {
            csv.push_str(&estimate_csv_row(&profile.name, *nu, 0.0, c));
            ratios.insert(c.check_id.clone(), json!(c.ratio));
        }
        entries.push(json!({
            "alpha": alpha, "nu": nu, "lambda": lambda, "n": n,
            "L1": l1, "L2": l2,
            "route_gap": [route_gap.0, route_gap.1],
            "assembly_gap": [assembly_gap.0, assembly_gap.1],
            "ratios": Value::Object(ratios),
        }));
    }
    write_text(&out.join("corrector-check.csv"), &csv)?;
    write_summary(out, &json!({"kind": "corrector-check", "entries": entries}))
}

fn cmd_airy_table(out: &Path) -> anyhow::Result<()> {
    let mut csv = String::from("z_re,z_im,ai_re,ai_im,dai_re,dai_im,a0_re,a0_im\n");
    // real axis and the two working rays
    let mut points = Vec::new();
    for k in -80..=80 {
        points.push(C64::new(k as f64 * 0.125, 0.0));
    }
    for k in 0..=60 {
        let t = k as f64 * 0.2;
        points.push(C64::from_polar(t, -std::f64::consts::FRAC_PI_6));
        points.push(C64::from_polar(t, std::f64::consts::FRAC_PI_6));
    }
    for z in points {
        let (ai, dai) = airy_ai_dai(z);
        let a0 = airy_a0(z, 1);
        csv.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            z.re, z.im, ai.re, ai.im, dai.re, dai.im, a0.re, a0.im
        ));
    }
    write_text(&out.join("airy-table.csv"), &csv)?;
    write_summary(
        out,
        &json!({"kind": "airy-table", "ai0": airy_ai_dai(C64::new(0.0,0.0)).0.re, "a0_at_0": airy_a0(C64::new(0.0,0.0), 1).re}),
    )
}

fn cmd_evolve_linear(cfg: &Config, out: &Path, seed: u64) -> anyhow::Result<()> {
    let profile = cfg.build_profile().map_err(anyhow::Error::msg)?;
    let seeds = cfg.require_seeds(seed);
    let mut runs = Vec::new();
    for &alpha in &cfg.sweep.alphas {
        for &nu in &cfg.sweep.nus {
            for &s in &seeds {
                let n = if cfg.grid.n > 0 {
                    cfg.grid.n
                } else {
                    shearstab_core::evolution::evolution_n(nu)
                };
                let ws = SpectralWorkspace::new(n);
                let mut w0 = seeded_field(&ws, alpha, s, 17);
                let h4 = ws.norm(&w0, NormKind::HkAlpha(4))?;
                w0 = w0.scaled(C64::new(1.0 / h4, 0.0));
                let opts = EvolveOptions {
                    dt: cfg.time.dt,
                    t_final: cfg.time.t_final,
                    eps_weight: cfg.time.eps_weight,
                    checkpoint_every: cfg.time.checkpoint_every,
                    sample_every: 4,
                    pure_diffusion: false,
                };
                let run = run_linear(&ws, &profile, nu, alpha, &w0, None, &opts)?;
                let mut csv = String::from("t,w_l2,u_l2,u_linf,w_weighted,dyw_l2\n");
                for smp in &run.series {
                    csv.push_str(&format!(
                        "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                        smp.t, smp.w_l2, smp.u_l2, smp.u_linf, smp.w_weighted, smp.dyw_l2
                    ));
                }
                let tag = format!("evolve-linear_nu{nu:e}_alpha{alpha}_seed{s}");
                write_text(&out.join(format!("{tag}.csv")), &csv)?;
                for (i, (t, field)) in run.checkpoints.iter().enumerate() {
                    let header = CheckpointHeader {
                        n,
                        alpha,
                        nu,
                        dt: cfg.time.dt,
                        t: *t,
                    };
                    write_checkpoint(&out.join(format!("{tag}_ckpt{i}.bin")), &header, field)?;
                }
                let check = shearstab_core::evolution::verify_spacetime_bound(&ws, &run, &w0)?;
                runs.push(json!({
                    "nu": nu, "alpha": alpha, "seed": s, "n": n,
                    "functionals": run.functionals,
                    "theorem_lhs": run.theorem_lhs(),
                    "spacetime_ratio": check.ratio,
                    "projection_deviation": run.projection_deviation,
                    "max_bc_defect_rel": run.max_bc_defect_rel,
                }));
            }
        }
    }
    write_summary(out, &json!({"kind": "evolve-linear", "runs": runs}))
}

fn cmd_evolve_euler(cfg: &Config, out: &Path) -> anyhow::Result<()> {
    let profile = cfg.build_profile().map_err(anyhow::Error::msg)?;
    let mut runs = Vec::new();
    for &alpha in &cfg.sweep.alphas {
        let n = if cfg.grid.n > 0 { cfg.grid.n } else { 512 };
        let ws = SpectralWorkspace::new(n);
        let w0 = Field::from_fn(&ws, alpha, |y| {
            let q = 1.0 - y * y;
            C64::new(q * q * (1.0 + 0.3 * y), 0.1 * q)
        });
        let euler = run_euler(&ws, &profile, alpha, &w0, cfg.time.t_final, cfg.time.dt)?;
        let mut csv = String::from("t,w_l2,u_l2,dphi_l2,alpha_phi_l2,w_at_0\n");
        for smp in &euler.run.series {
            csv.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                smp.t, smp.w_l2, smp.u_l2, smp.dphi_l2, smp.alpha_phi_l2, smp.w_at_0
            ));
        }
        write_text(&out.join(format!("evolve-euler_alpha{alpha}.csv")), &csv)?;
        let fits: Map<String, Value> = euler
            .fits
            .iter()
            .map(|(k, f)| {
                (
                    k.clone(),
                    json!({"exponent": f.rate, "r2": f.r2, "window": [f.window.0, f.window.1]}),
                )
            })
            .collect();
        runs.push(json!({
            "alpha": alpha, "n": n, "t_final": cfg.time.t_final,
            "fits": Value::Object(fits),
            "tail_fraction": euler.tail_fraction,
        }));
    }
    write_summary(out, &json!({"kind": "evolve-euler", "runs": runs}))
}

fn cmd_evolve_nonlinear(cfg: &Config, out: &Path, seed: u64) -> anyhow::Result<()> {
    let profile = cfg.build_profile().map_err(anyhow::Error::msg)?;
    let seeds = cfg.require_seeds(seed);
    let nu = cfg.sweep.nus[0];
    let n = if cfg.grid.n > 0 { cfg.grid.n } else { 160 };
    let ws = SpectralWorkspace::new(n);
    let amplitude_factor = cfg.sweep.amplitude_factors.first().copied().unwrap_or(0.01);
    let amplitude = amplitude_factor * nu.powf(2.0 / 3.0);
    let opts = NonlinearOptions {
        dt: cfg.time.dt,
        t_final: cfg.time.t_final,
        eps_weight: cfg.time.eps_weight,
        no_background: false,
        dt_retry: true,
    };
    let mut csv = String::from("nu,amplitude,seed,verdict,final_E,max_E\n");
    let mut runs = Vec::new();
    for &s in &seeds {
        let data = seeded_initial_modes(&ws, cfg.sweep.k_max, s);
        let run = run_nonlinear(&ws, &profile, nu, cfg.sweep.k_max, &data, amplitude, &opts)?;
        csv.push_str(&format!(
            "{:.12e},{:.12e},{},{},{:.12e},{:.12e}\n",
            nu,
            amplitude,
            s,
            run.verdict,
            run.e_final,
            run.e_initial * run.max_growth_factor
        ));
        runs.push(json!({
            "nu": nu, "amplitude": amplitude, "seed": s, "k_max": cfg.sweep.k_max, "n": n,
            "verdict": run.verdict.to_string(),
            "e_initial": run.e_initial, "e_final": run.e_final,
            "max_growth_factor": run.max_growth_factor,
            "blow_up": run.blow_up,
        }));
    }
    write_text(&out.join("evolve-nonlinear.csv"), &csv)?;
    write_summary(out, &json!({"kind": "evolve-nonlinear", "runs": runs}))
}

fn cmd_threshold_sweep(cfg: &Config, out: &Path, seed: u64) -> anyhow::Result<()> {
    let profile = cfg.build_profile().map_err(anyhow::Error::msg)?;
    let seeds = cfg.require_seeds(seed);
    let nu0 = cfg.sweep.nus.first().copied().unwrap_or(1e-4);
    let n = if cfg.grid.n > 0 { cfg.grid.n } else { 160 };
    let ws = SpectralWorkspace::new(n);
    let opts = NonlinearOptions {
        dt: cfg.time.dt,
        t_final: cfg.time.t_final,
        eps_weight: cfg.time.eps_weight,
        no_background: false,
        dt_retry: true,
    };
    let _ = nu0;
    let sweep = threshold_sweep(
        &ws,
        &profile,
        &cfg.sweep.nus,
        &cfg.sweep.amplitude_factors,
        seeds[0],
        cfg.sweep.k_max,
        &opts,
    )?;
    let mut csv = String::from("nu,amplitude,seed,verdict,final_E,max_E\n");
    for c in &sweep.cells {
        csv.push_str(&format!(
            "{:.12e},{:.12e},{},{},{:.12e},{:.12e}\n",
            c.nu, c.amplitude, c.seed, c.verdict, c.e_final_over_initial, c.max_growth_factor
        ));
    }
    write_text(&out.join("threshold-sweep.csv"), &csv)?;
    let a_star: Vec<Value> = sweep
        .a_star
        .iter()
        .map(|(nu, a)| json!({"nu": nu, "a_star_factor": a}))
        .collect();
    write_summary(
        out,
        &json!({
            "kind": "threshold-sweep",
            "a_star": a_star,
            "monotonicity_violations": sweep.monotonicity_violations,
            "fit": sweep.fit.map(|f| json!({"slope": f.slope, "r2": f.r2})),
        }),
    )
}

fn cmd_estimate_sweep(cfg: &Config, out: &Path, threads: usize) -> anyhow::Result<()> {
    let profile = cfg.build_profile().map_err(anyhow::Error::msg)?;
    let lambdas = if cfg.sweep.lambdas.is_empty() {
        vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.1]
    } else {
        cfg.sweep.lambdas.clone()
    };
    let mut combos = Vec::new();
    for &alpha in &cfg.sweep.alphas {
        for &nu in &cfg.sweep.nus {
            for &lambda in &lambdas {
                combos.push((alpha, nu, lambda));
            }
        }
    }
    type SweepRow = (Vec<EstimateCheck>, Vec<(String, String)>, f64);
    let results: Vec<SweepRow> = par_map_ordered(&combos, threads, |&(alpha, nu, lambda)| {
        let n = grid_n(cfg, nu, alpha);
        let ws = SpectralWorkspace::new(n);
        let prob = OSProblem::new(nu, alpha, lambda, BoundaryCondition::NavierSlip)?;
        let f = Field::from_real_fn(&ws, alpha, |y| {
            let q = 1.0 - y * y;
            q * q
        });
        let (mut checks, skipped) = check_energy_estimates(&ws, &profile, &prob, &f)?;
        // limiting-absorption Rayleigh check at the first configured δ
        let delta = cfg.sweep.deltas.first().copied().unwrap_or(1e-2);
        if let Ok(c) = ray_bound_sweep_point(&ws, &profile, alpha, lambda, delta, &f) {
            checks.push(c);
        }
        if let Ok(c) = weak_type_ratio(&ws, &profile, &prob, &f) {
            checks.push(c);
        }
        Ok((checks, skipped, delta))
    })?;
    let mut csv = estimate_csv_header();
    let mut skipped_all = Vec::new();
    for ((_, nu, _), (checks, skipped, delta)) in combos.iter().zip(&results) {
        for c in checks {
            csv.push_str(&estimate_csv_row(&profile.name, *nu, *delta, c));
        }
        for (id, why) in skipped {
            skipped_all.push(json!({"check": id, "reason": why}));
        }
    }
    write_text(&out.join("estimate-sweep.csv"), &csv)?;
    write_summary(
        out,
        &json!({"kind": "estimate-sweep", "combos": combos.len(), "skipped": skipped_all}),
    )
}

fn cmd_accept(out: &Path, threads: usize, seed: u64) -> ExitCode {
    match shearstab_core::acceptance::run_all(seed, threads) {
        Ok(summary) => {
            for c in &summary.criteria {
                println!(
                    "criterion {:>2}: {} — {} [{}]",
                    c.id,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            let json_text = summary.to_json();
            if let Err(e) = write_text(&out.join("summary.json"), &json_text) {
                eprintln!("cannot write summary: {e}");
                return ExitCode::from(3);
            }
            if summary.all_pass {
                println!("acceptance: all criteria PASS");
                ExitCode::SUCCESS
            } else {
                println!("acceptance: FAILURES present");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(3)
        }
    }
}

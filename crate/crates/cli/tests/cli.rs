//! CLI smoke tests: config handling, output shapes, determinism of reruns.

use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_shearstab")
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawn shearstab")
}

fn write_cfg(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "[sweep]\nnus = [5.0]\n");
    let out = run(&[
        "airy-table",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_sweep_is_noop_success() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "[sweep]\nnus = []\nalphas = []\nseeds = [1]\n",
    );
    let out = run(&[
        "coercivity-check",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("coercivity-check.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "expected header-only CSV");
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn airy_table_has_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["airy-table", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    let ai0 = summary["ai0"].as_f64().unwrap();
    assert!((ai0 - 0.355028053887817).abs() < 1e-10);
    let a00 = summary["a0_at_0"].as_f64().unwrap();
    assert!((a00 - 1.0 / 3.0).abs() < 1e-8);
}

#[test]
fn smoke_runs_are_deterministic_across_threads() {
    // a small resolvent scan twice with different thread counts must produce
    // byte-identical outputs
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let cfg_text = r#"
[grid]
n = 64
[sweep]
nus = [1e-3]
alphas = [1]
bc = "navier_slip"
seeds = [7]
"#;
    let cfg1 = write_cfg(dir1.path(), cfg_text);
    for (dir, threads) in [(&dir1, "1"), (&dir2, "3")] {
        let out = run(&[
            "resolvent-scan",
            "--config",
            &cfg1,
            "--out",
            dir.path().to_str().unwrap(),
            "--threads",
            threads,
            "--seed",
            "7",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir1.path().join("resolvent-scan.csv")).unwrap();
    let b = std::fs::read(dir2.path().join("resolvent-scan.csv")).unwrap();
    assert_eq!(a, b, "CSV differs across thread counts");
    let a = std::fs::read(dir1.path().join("summary.json")).unwrap();
    let b = std::fs::read(dir2.path().join("summary.json")).unwrap();
    assert_eq!(a, b, "summary differs across thread counts");
}

#[test]
fn evolve_linear_smoke_writes_series_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        r#"
[grid]
n = 64
[sweep]
nus = [1e-3]
alphas = [1]
seeds = [3]
[time]
dt = 0.05
t_final = 1.0
checkpoint_every = 10
"#,
    );
    let out = run(&[
        "evolve-linear",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv_name = "evolve-linear_nu1e-3_alpha1_seed3.csv";
    let csv = std::fs::read_to_string(dir.path().join(csv_name)).unwrap();
    assert!(csv.lines().count() > 3);
    assert!(dir.path().join("evolve-linear_nu1e-3_alpha1_seed3_ckpt0.bin").exists());
}

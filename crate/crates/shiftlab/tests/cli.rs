//! Black-box tests of the binary: golden output, determinism, exit codes,
//! CSV round trips.

use std::process::{Command, Output};

use shiftlab::TruncatedSeries;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shiftlab"))
}

fn run(dir: &std::path::Path, args: &[&str]) -> Output {
    bin()
        .arg("--no-meta")
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn pn_golden_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["pn", "--n", "1"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "z10 + z00*z01\n");
    assert!(dir.path().join("pn.json").exists());
    assert!(!dir.path().join("meta.json").exists());
}

#[test]
fn reports_are_byte_identical() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let args = ["classify", "--a0", "1", "--b0", "1", "--lambda", "2", "--y0", "1"];
    let o1 = run(d1.path(), &args);
    let o2 = run(d2.path(), &args);
    assert!(o1.status.success() && o2.status.success());
    assert_eq!(o1.stdout, o2.stdout);
    let r1 = std::fs::read(d1.path().join("classify.json")).unwrap();
    let r2 = std::fs::read(d2.path().join("classify.json")).unwrap();
    assert_eq!(r1, r2);
    let v: serde_json::Value = serde_json::from_slice(&r1).unwrap();
    assert_eq!(v["verdict"], "Nonanalytic");
}

#[test]
fn sigma_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["koenigs", "--lambda", "13", "--order", "20"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("sigma.csv")).unwrap();
    let series = TruncatedSeries::from_csv(0.0, &csv).unwrap();
    assert_eq!(series.to_csv(), csv);
    assert_eq!(series.order(), 20);
}

#[test]
fn meta_sidecar_is_opt_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("--output-dir")
        .arg(dir.path())
        .args(["pn", "--n", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let meta = std::fs::read_to_string(dir.path().join("meta.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&meta).unwrap();
    assert!(v["generated_unix"].is_u64());
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("SHIFTLAB_OUTPUT_DIR", dir.path())
        .args(["--no-meta", "pn", "--n", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("pn.json").exists());
}

#[test]
fn domain_error_exits_two_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["koenigs", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(v["error"].is_string());
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["koenigs", "--frequency", "3"]);
    assert_eq!(out.status.code(), Some(1));
    // flag-combination problems too
    let out = run(dir.path(), &["eigen", "--r0", "1", "--lambda", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_runs_and_namespaces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        r#"[
            {"command":"pn","n":1},
            {"command":"rotation","advance":0.5,"period":1.0}
        ]"#,
    )
    .unwrap();
    let out = run(dir.path(), &["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(dir.path().join("run000_pn.json").exists());
    assert!(dir.path().join("run001_rotation.json").exists());

    // strict parsing: unknown keys are rejected before anything runs
    std::fs::write(&cfg, r#"[{"command":"pn","n":1,"bogus":2}]"#).unwrap();
    let out = run(dir.path(), &["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn coexist_emits_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["coexist", "--lambda", "7.4", "--m", "2", "--n", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("coexist.json")).unwrap())
            .unwrap();
    assert_eq!(v["pq_satisfied"], true);
    assert!((v["contractive"]["t_star"].as_f64().unwrap() - 1.76215).abs() < 1e-4);
    for f in ["w.csv", "eigenfunction.csv", "orbit.csv"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

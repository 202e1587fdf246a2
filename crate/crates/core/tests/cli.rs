use std::fs;
use std::path::Path;
use std::process::Command;

use spinbath::cli::{run, ExperimentConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinbath"))
}

fn data_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn simulate_r_writes_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["simulate-r", "--n", "100", "--seed", "7", "--t-max", "100", "--points", "2000", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# spinbath 0.1.0 config "));
    assert_eq!(lines.next().unwrap(), "t,re_r,im_r,abs_r");
    assert!(!text.contains('\r'));
    let rows = data_rows(&dir.path().join("r.csv"));
    assert_eq!(rows.len(), 2000);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[0][3] - 1.0).abs() < 1e-12 && rows[0][2] == 0.0);
    for r in &rows {
        assert!((r[1].hypot(r[2]) - r[3]).abs() < 1e-15);
    }
    let model: spinbath::SpinBathModel =
        serde_json::from_str(&fs::read_to_string(dir.path().join("model.json")).unwrap()).unwrap();
    assert_eq!(model.n_sites(), 100);
}

#[test]
fn single_site_sigma_z_column_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["simulate-obs", "--n", "6", "--obs", "single-site:3", "--eps", "sz", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let rows = data_rows(&dir.path().join("obs.csv"));
    let first = rows[0][1];
    assert!(rows.iter().all(|r| (r[1] - first).abs() < 1e-12));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"command": "timescale", "v1": 1e23, "v2": 1}"#).unwrap();
    let out = dir.path().join("out");
    let status = bin().arg("--config").arg(&cfg).args(["--v2", "2"]).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("timescale.json")).unwrap()).unwrap();
    assert_eq!(report["V2_eV"], 2.0);
    assert_eq!(report["hierarchy_ok"], true);
    assert_eq!(report["version"], "spinbath 0.1.0");
    assert_eq!(report["config_digest"].as_str().unwrap().len(), 16);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| bin().args(args).arg("--out").arg(dir.path()).output().unwrap().status.code();

    let unknown = bin().arg("frobnicate").output().unwrap();
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("usage"));

    assert_eq!(code(&["simulate-r", "--coeff-dist", "gaussian"]), Some(1));
    assert_eq!(code(&["simulate-r", "--a", "1,0", "--b", "1,0"]), Some(1));
    assert_eq!(code(&["simulate-obs", "--obs", "single-site:99"]), Some(1));
    assert_eq!(code(&["oracle-check", "--n", "30"]), Some(2));
    assert_eq!(code(&["--bogus-flag"]), Some(1));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let io = bin().args(["timescale", "--out"]).arg(blocker.join("sub")).status().unwrap();
    assert_eq!(io.code(), Some(3));
}

#[test]
fn oracle_check_report() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().args(["oracle-check", "--n", "6", "--trials", "5", "--out"]).arg(dir.path()).status().unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("oracle_check.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report["max_delta"]["expectation"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn recurrence_reports_revival() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().args(["recurrence", "--n", "5", "--g-base", "1.0", "--out"]).arg(dir.path()).status().unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("recurrence.json")).unwrap()).unwrap();
    assert!((report["abs_r_at_t_rec"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
    assert!(report["observable_period_delta"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn sweep_median_decreases_with_n() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sweep-n", "--n-list", "20,100", "--seeds", "5", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep_summary.json")).unwrap()).unwrap();
    let rows = summary["rows"].as_array().unwrap();
    let sup = |i: usize| rows[i]["median_sup_late"].as_f64().unwrap();
    assert!(sup(1) < sup(0));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().arg("timescale").env("SPINBATH_OUT_DIR", dir.path()).status().unwrap();
    assert!(status.success());
    assert!(dir.path().join("timescale.json").exists());
}

#[test]
fn library_run_lists_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        command: "fluctuation".into(),
        output: Some(dir.path().to_string_lossy().into_owned()),
        ..Default::default()
    };
    let report = run(&cfg).unwrap();
    assert_eq!(report.digest, cfg.digest());
    assert_eq!(report.files.len(), 2);
}

//! End-to-end tests of the `dcqo` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dcqo() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dcqo"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn data_csv() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/prices_20.csv")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("file exists")).expect("valid JSON")
}

#[test]
fn solve_random_instance_writes_valid_report() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dcqo()
        .args(["solve", "--random-n", "6", "--instance-seed", "3", "--method", "cd-only"])
        .arg("--out-dir")
        .arg(dir.path()));
    let report = read_json(&dir.path().join("cd-only_report.json"));
    let r = report["r_avg_expectation"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&r), "r_avg {r}");
    assert_eq!(report["e_avg"].as_f64().unwrap(), 0.0);
    assert_eq!(report["search_set"], "uniform");
    assert!(dir.path().join("cd-only_histogram.csv").exists());
    assert!(dir.path().join("cd-only_counts.json").exists());
    assert!(dir.path().join("cd-only_circuit.txt").exists());
}

#[test]
fn solve_portfolio_defaults_reports_surviving_steps() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dcqo()
        .args(["solve", "--csv"])
        .arg(data_csv())
        .args(["--method", "cd-only", "--prefix", "port"])
        .arg("--out-dir")
        .arg(dir.path()));
    let report = read_json(&dir.path().join("port_report.json"));
    assert_eq!(report["n"], 20);
    assert!(report["config"]["surviving_steps"].is_u64());
    assert!(report["r_avg_expectation"].is_f64());
    // Defaults echoed into the report.
    assert_eq!(report["config"]["cutoff"].as_f64().unwrap(), 0.1);
    assert_eq!(report["config"]["shots"].as_u64().unwrap(), 5000);
}

#[test]
fn invalid_budget_is_rejected() {
    let out = dcqo()
        .args(["solve", "--csv"])
        .arg(data_csv())
        .args(["--budget", "25", "--out-dir", "/tmp/unused-dcqo"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("budget"), "stderr: {stderr}");
}

#[test]
fn benchmark_single_instance_yields_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dcqo()
        .args(["benchmark", "--instances", "1", "--n-min", "5", "--n-max", "5"])
        .arg("--out-dir")
        .arg(dir.path()));
    let csv = std::fs::read_to_string(dir.path().join("benchmark_runs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4); // header + 3 methods
    let summary = read_json(&dir.path().join("benchmark_summary.json"));
    assert_eq!(summary["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn profile_writes_one_row_per_step_with_zero_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dcqo()
        .args(["profile", "--random-n", "4", "--instance-seed", "1"])
        .arg("--out-dir")
        .arg(dir.path()));
    let csv = std::fs::read_to_string(dir.path().join("cd_profile.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 8); // header + 7 steps at T=0.7, dt=0.1
    let last: Vec<&str> = lines[7].split(',').collect();
    // λ̇(T) = 0, so the final weight vanishes (up to sin(π) rounding).
    assert!(last[5].parse::<f64>().unwrap().abs() < 1e-12);
    // Peak row matches a direct tabulation of λ̇·α₁ over the step grid.
    let weights: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(5).unwrap().parse::<f64>().unwrap().abs())
        .collect();
    let argmax = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    let sg = dcqo_core::ising::random_spin_glass(4, 1).unwrap();
    let direct: Vec<f64> = (1..=7)
        .map(|m| {
            let t = if m == 7 { 0.7 } else { m as f64 * 0.1 };
            dcqo_core::schedule::cd_weight(&sg, t, 0.7).unwrap().1
        })
        .collect();
    let direct_argmax = direct
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    assert_eq!(argmax, direct_argmax);
}

#[test]
fn transpile_verifies_small_circuit() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dcqo()
        .args(["solve", "--random-n", "3", "--instance-seed", "9", "--method", "cd-only"])
        .args(["--cutoff", "0", "--prefix", "tiny"])
        .arg("--out-dir")
        .arg(dir.path()));
    let circuit = dir.path().join("tiny_circuit.txt");
    let native = dir.path().join("tiny.native.txt");
    run_ok(dcqo()
        .arg("transpile")
        .arg("--circuit")
        .arg(&circuit)
        .arg("--output")
        .arg(&native)
        .arg("--verify"));
    let text = std::fs::read_to_string(&native).unwrap();
    assert!(text.lines().skip(1).all(|l| {
        l.starts_with("GPI") || l.starts_with("GPI2") || l.starts_with("MS") || l.is_empty()
    }));
}

#[test]
fn identical_configs_give_byte_identical_reports() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        run_ok(dcqo()
            .args(["solve", "--random-n", "7", "--instance-seed", "11", "--method", "hdcqo"])
            .args(["--layers", "1", "--sample-seed", "5"])
            .arg("--out-dir")
            .arg(d.path()));
    }
    let a = std::fs::read(d1.path().join("h-dcqo_report.json")).unwrap();
    let b = std::fs::read(d2.path().join("h-dcqo_report.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        serde_json::json!({
            "problem": {"random_n": 5, "instance_seed": 2},
            "method": "adiabatic",
            "total_time": 0.5,
            "dt": 0.1
        })
        .to_string(),
    )
    .unwrap();
    run_ok(dcqo()
        .arg("solve")
        .arg("--config")
        .arg(&cfg_path)
        .args(["--method", "cd"]) // flag wins over the file's "adiabatic"
        .arg("--out-dir")
        .arg(dir.path()));
    let report = read_json(&dir.path().join("cd_report.json"));
    assert_eq!(report["method"], "cd");
    assert_eq!(report["config"]["total_time"].as_f64().unwrap(), 0.5);
    assert_eq!(report["config"]["steps"].as_u64().unwrap(), 5);
}

#[test]
fn malformed_config_reports_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.json");
    std::fs::write(&cfg_path, "{\n  \"method\": \"cd-only\",\n  \"dt\": oops\n}\n").unwrap();
    let out = dcqo()
        .arg("solve")
        .arg("--config")
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
}

#[test]
fn spectrum_dump_has_argmin_and_offset_fields() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(dcqo()
        .args(["spectrum", "--random-n", "6", "--instance-seed", "4"])
        .args(["--spectrum-budget", "3"])
        .arg("--out-dir")
        .arg(dir.path()));
    let doc = read_json(&dir.path().join("instance_spectrum.json"));
    assert!(doc["e_min"].as_f64().unwrap() < 0.0);
    assert!(!doc["argmin"].as_array().unwrap().is_empty());
    assert!(doc["e_avg_feasible"].is_f64());
    assert_eq!(doc["argmin"][0].as_str().unwrap().len(), 6);
}

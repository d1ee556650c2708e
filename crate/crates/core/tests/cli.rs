use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphere-frames"))
        .args(args)
        .output()
        .expect("spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares stdout with a stored report. `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, args: &[&str]) {
    let out = run(args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &out.stdout).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), expected, "golden {name}");
}

fn assert_schema(r: &Value) {
    let obj = r.as_object().expect("object");
    let mut keys: Vec<_> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["command", "result", "seed", "status"]);
    assert!(matches!(r["status"].as_str(), Some("ok" | "fail")));
}

#[test]
fn gegenbauer_example_value() {
    let out = run(&["gegenbauer", "--n", "5", "--d", "2", "--t", "0"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_schema(&r);
    assert_eq!(r["result"]["value"].as_f64(), Some(-0.25));
}

#[test]
fn negative_arguments_parse() {
    let out = run(&["gegenbauer", "--n", "3", "--d", "1", "--t", "-0.5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["result"]["value"].as_f64(), Some(-0.5));
}

#[test]
fn level_d_on_named_band_passes() {
    let out = run(&["verify", "--suite", "level-d", "--profile", "band", "--n", "10"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["result"]["summary"]["violated"], 0);
}

#[test]
fn find_frame_example() {
    let out = run(&["find-frame", "--set", "cap_complement", "--eps", "0.05", "--n", "12", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_schema(&r);
    assert_eq!(r["seed"], 7);
    let run = &r["result"]["run"];
    assert_eq!(run["vectors"].as_array().unwrap().len(), 12);
    assert_eq!(run["verification"]["passed"], true);
}

#[test]
fn failed_search_exits_one_with_report() {
    // The band |x1| < 1/√n holds no orthogonal n-frame.
    let out = run(&[
        "find-frame", "--set", "band", "--n", "6", "--seed", "1", "--candidates", "4",
        "--slice-samples", "256", "--terminal-trials", "20",
    ]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_schema(&r);
    assert_eq!(r["status"], "fail");
    assert!(r["result"]["run"]["failure"]["reason"].is_string());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify", "--suite", "gt"][..],
        &["find-frame", "--set", "full", "--n", "4"],
        &["gegenbauer", "--n", "1", "--d", "0", "--t", "0"],
        &["gegenbauer", "--n", "3", "--d", "2", "--t", "1.5"],
        &["spectrum", "--set", "torus", "--n", "3"],
        &["spectrum", "--set", "full", "--n", "3", "--tau", "0.5"],
        &["no-such-command"],
        &[],
    ] {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out_path = dir.path().join("report.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "command": "gt",
            "params": {"set": "band", "n": 5, "t": 0.5, "samples": 20000, "d_max": 12},
            "seed": 3,
            "output_path": out_path,
        })
        .to_string(),
    )
    .unwrap();
    let via_config = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&via_config), 0, "{}", String::from_utf8_lossy(&via_config.stderr));
    let via_flags = run(&[
        "--seed", "3", "gt", "--set", "band", "--n", "5", "--t", "0.5", "--samples", "20000", "--d-max", "12",
    ]);
    assert_eq!(via_config.stdout, via_flags.stdout);
    assert_eq!(std::fs::read(&out_path).unwrap(), via_flags.stdout);
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command":"gegenbauer","params":{"n":3,"degree":2}}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("degree"));

    std::fs::write(&cfg, r#"{"command":"gegenbauer","params":{"n":3},"colour":1}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn profile_alias_is_accepted_in_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command":"verify","params":{"suite":"level-d","profile":"band","n":10}}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweeps_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("zero.csv");
    let out = run(&["gegenbauer", "--n", "10", "--sweep-zero", "12", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,p_zero,bound"));
    assert_eq!(lines.count(), 13);

    let csv = dir.path().join("densities.csv");
    let out = run(&["verify", "--suite", "densities", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n,double_cap,band\n"));
}

#[test]
fn profile_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("band.json");
    std::fs::write(&p, r#"{"n":4,"kind":"indicator","breakpoints":[-0.5,0.5],"symmetric":true}"#).unwrap();
    let from_file = run(&["spectrum", "--set", p.to_str().unwrap(), "--d-max", "6"]);
    let named = run(&["spectrum", "--set", "band", "--n", "4", "--d-max", "6"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, named.stdout);
}

#[test]
fn golden_gegenbauer() {
    golden("gegenbauer.json", &["gegenbauer", "--n", "7", "--d", "6", "--t", "0.3"]);
}

#[test]
fn golden_spectrum() {
    golden("spectrum.json", &["spectrum", "--set", "double_cap", "--n", "3", "--d-max", "8"]);
}

#[test]
fn golden_gt() {
    golden(
        "gt.json",
        &["--seed", "11", "gt", "--set", "cap", "--n", "5", "--t", "0.5", "--samples", "50000", "--d-max", "12"],
    );
}

#[test]
fn golden_find_frame() {
    golden(
        "find_frame.json",
        &["--seed", "5", "find-frame", "--set", "band", "--n", "6", "--tau", "0.6", "--candidates", "8"],
    );
}

use std::path::Path;
use std::process::{Command, Output};

fn clockmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clockmap")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn out_dir(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn verify_small_torus_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = clockmap(&["verify", "--d", "3", "--L", "2", "--out", out_dir(tmp.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("verify.json")).unwrap()).unwrap();
    let rows = report.as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["pass"] == true));
    assert!(tmp.path().join("manifest.json").exists());
}

#[test]
fn oversized_exact_hits_the_cap() {
    let tmp = tempfile::tempdir().unwrap();
    let o = clockmap(&["exact", "--d", "6", "--L", "64", "--T", "1.0", "--out", out_dir(tmp.path())]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oversized_verify_hits_the_cap() {
    let tmp = tempfile::tempdir().unwrap();
    let o = clockmap(&["verify", "--d", "6", "--L", "4", "--out", out_dir(tmp.path())]);
    assert_eq!(code(&o), 3);
}

#[test]
fn config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(tmp.path());
    for args in [
        vec!["exact", "--d", "2", "--out", dir],
        vec!["exact", "--d", "2", "--L", "2", "--T", "-1", "--out", dir],
        vec!["mc", "--d", "2", "--L", "4", "--T", "1", "--rng", "pcg", "--out", dir],
        vec!["mc", "--d", "x", "--L", "4", "--out", dir],
        vec!["exact", "--bogus"],
    ] {
        let o = clockmap(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }

    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "d = 2\nL = 4\nspeed = 3\n").unwrap();
    let o = clockmap(&["mc", "--config", cfg.to_str().unwrap(), "--out", dir]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "d = 2\nL = 2\nT = [1.0, 2.0]\n").unwrap();
    let out = tmp.path().join("o");
    let o = clockmap(&["exact", "--config", cfg.to_str().unwrap(), "--T", "3.0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(out.join("exact_L2.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
    assert!(csv.lines().nth(2).unwrap().starts_with("3.0,"));
}

#[test]
fn replay_matches_and_detects_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("mc");
    let o = clockmap(&[
        "mc", "--d", "3", "--L", "4", "--T", "0.9,1.4", "--sweeps", "500", "--therm", "50", "--seed", "11", "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = dir.join("manifest.json");
    let o = clockmap(&["replay", manifest.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(&manifest).unwrap();
    let tampered = text.replacen("\"seed\": 11", "\"seed\": 12", 1);
    assert_ne!(text, tampered);
    let bad = tmp.path().join("tampered.json");
    std::fs::write(&bad, tampered).unwrap();
    let o = clockmap(&["replay", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn string_scan_exact_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = clockmap(&["string-scan", "--d", "2", "--L", "2", "--beta", "0.3,0.9", "--out", out_dir(tmp.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("strings_L2.csv")).unwrap();
    // 3 partners of vertex 0, two paths, two betas
    assert_eq!(csv.lines().count(), 2 + 12);
}

#[test]
fn workers_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_clockmap"))
        .args(["verify", "--d", "2", "--L", "2", "--out", "unused"])
        .env("CLOCKMAP_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

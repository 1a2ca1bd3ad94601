use std::process::Command;

fn cat0lab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cat0lab")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn config(dir: &tempfile::TempDir, name: &str, json: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn drift_writes_record_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "z.json", r#"{"group": {"kind": "lattice", "rank": 1}, "params": {"n_max": 6}}"#);
    let out = dir.path().join("out");
    let (code, stdout, _) = cat0lab(&["drift", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["status"], "complete");
    assert!(out.join("drift.json").exists());
    let csv = std::fs::read_to_string(out.join("drift.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn seeds_make_runs_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "f2.json", r#"{"group": {"kind": "free", "rank": 2}, "params": {"n_max": 20}}"#);
    let run = |seed: &str| {
        let (code, stdout, _) = cat0lab(&["drift", "--config", &cfg, "--monte-carlo", "--samples", "500", "--seed", seed]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
        v["payload"].clone()
    };
    assert_eq!(run("4"), run("4"));
    assert_ne!(run("4"), run("5"));
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = cat0lab(&["drift", "--config", "/nonexistent/config.json"]);
    assert_eq!(code, 1);
    assert!(stderr.starts_with("error:"));
    let cfg = config(&dir, "bad.json", r#"{"group": {"kind": "lattice", "rank": 1}, "colour": 3}"#);
    assert_eq!(cat0lab(&["drift", "--config", &cfg]).0, 1);
    let cfg = config(&dir, "op.json", r#"{"operation": "shalom", "group": {"kind": "lattice", "rank": 1}}"#);
    assert_eq!(cat0lab(&["drift", "--config", &cfg]).0, 1);
}

#[test]
fn violations_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // tolerance below the resolution of any nondegenerate check forces a violation
    let cfg = config(
        &dir,
        "space.json",
        r#"{"space": {"kind": "hyperbolic_plane"}, "params": {"triples": 2000, "samples": 50, "tol": -1.0}}"#,
    );
    let (code, stdout, _) = cat0lab(&["space-check", "--config", &cfg]);
    assert_eq!(code, 2, "{stdout}");
    let (code, _, _) = cat0lab(&["space-check", "--config", &cfg, "--tol", "1e-9"]);
    assert_eq!(code, 0);
}

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use tpp_depth::io::{load_csv, read_params};

fn tpp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tpp-depth"))
        .current_dir(dir)
        .env_remove("TPP_DEPTH_OUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn simulate(dir: &Path, name: &str) {
    let out = tpp(
        dir,
        &["simulate", "--kind", "hpp", "--rates", "2", "--k", "2", "--n", "100", "--seed", "4", "--out", name],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_writes_requested_rows() {
    let dir = TempDir::new().unwrap();
    simulate(dir.path(), "s.csv");
    let sample = load_csv(dir.path().join("s.csv"), 0.0).unwrap();
    assert_eq!((sample.len(), sample.k()), (100, 2));
}

#[test]
fn simulate_is_deterministic_and_stdout_matches_file() {
    let dir = TempDir::new().unwrap();
    simulate(dir.path(), "a.csv");
    simulate(dir.path(), "b.csv");
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    let out = tpp(
        dir.path(),
        &["simulate", "--kind", "hpp", "--rates", "2", "--k", "2", "--n", "100", "--seed", "4"],
    );
    assert_eq!(out.stdout, a);
}

#[test]
fn config_file_drives_simulation() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("sim.json"),
        r#"{"kind": "state-dependent", "rates": [1.0, 3.0, 0.5], "k": 3, "n": 25, "seed": 2}"#,
    )
    .unwrap();
    let out = tpp(dir.path(), &["simulate", "--config", "sim.json", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sample = load_csv(dir.path().join("s.csv"), 0.0).unwrap();
    assert_eq!((sample.len(), sample.k()), (25, 3));
}

#[test]
fn fit_then_verify_has_no_violations() {
    let dir = TempDir::new().unwrap();
    simulate(dir.path(), "s.csv");
    let fit = tpp(dir.path(), &["fit", "--in", "s.csv", "--params-out", "p.json"]);
    assert_eq!(fit.status.code(), Some(0), "{}", String::from_utf8_lossy(&fit.stderr));
    let params = read_params(dir.path().join("p.json")).unwrap();
    assert_eq!(params.k, 2);

    let out = tpp(
        dir.path(),
        &["verify", "--params", "p.json", "--trials", "500", "--in", "s.csv", "--out", "r.json"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    for check in report["checks"].as_array().unwrap() {
        assert_eq!(check["violations"], 0, "{check}");
    }
}

#[test]
fn depth_rank_contour_and_boundary_run() {
    let dir = TempDir::new().unwrap();
    simulate(dir.path(), "s.csv");
    assert_eq!(tpp(dir.path(), &["fit", "--in", "s.csv", "--params-out", "p.json"]).status.code(), Some(0));
    let before = std::fs::read(dir.path().join("s.csv")).unwrap();

    for method in ["product", "marginal", "conditional", "hpp-conditional", "mahalanobis"] {
        for cmd in ["depth", "rank"] {
            let out = tpp(dir.path(), &[cmd, "--in", "s.csv", "--params", "p.json", "--method", method]);
            assert_eq!(out.status.code(), Some(0), "{cmd} {method}: {}", String::from_utf8_lossy(&out.stderr));
            // header plus one line per realization
            assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 101, "{cmd} {method}");
        }
    }

    let out = tpp(
        dir.path(),
        &["contour", "--params", "p.json", "--xmin", "0", "--xmax", "2", "--ymin", "0", "--ymax", "2", "--resolution", "11", "--out", "c.csv"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 11 * 11);

    let out = tpp(dir.path(), &["compare-boundary", "--in", "s.csv", "--threshold", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["n"], 100);

    assert_eq!(std::fs::read(dir.path().join("s.csv")).unwrap(), before);
}

#[test]
fn out_dir_variable_resolves_relative_paths() {
    let dir = TempDir::new().unwrap();
    let target = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tpp-depth"))
        .current_dir(dir.path())
        .env("TPP_DEPTH_OUT_DIR", target.path())
        .args(["simulate", "--kind", "hpp", "--rates", "1", "--k", "2", "--n", "5", "--out", "s.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.path().join("s.csv").exists());
    assert!(!dir.path().join("s.csv").exists());
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = TempDir::new().unwrap();
    simulate(dir.path(), "s.csv");
    assert_eq!(tpp(dir.path(), &["fit", "--in", "s.csv", "--params-out", "p.json"]).status.code(), Some(0));

    let typo = tpp(dir.path(), &["rank", "--in", "s.csv", "--params", "p.json", "--method", "prodcut"]);
    assert_eq!(typo.status.code(), Some(1));
    assert_eq!(tpp(dir.path(), &["bogus"]).status.code(), Some(1));
    let threshold = tpp(dir.path(), &["compare-boundary", "--in", "s.csv", "--threshold", "2"]);
    assert_eq!(threshold.status.code(), Some(1));

    std::fs::write(dir.path().join("bad.csv"), "0.5,1.0\n0.7,abc\n").unwrap();
    let bad = tpp(dir.path(), &["fit", "--in", "bad.csv"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("row"));
    assert_eq!(tpp(dir.path(), &["fit", "--in", "missing.csv"]).status.code(), Some(2));
    std::fs::write(dir.path().join("unordered.csv"), "0.5,1.0\n0.9,0.4\n").unwrap();
    assert_eq!(tpp(dir.path(), &["fit", "--in", "unordered.csv"]).status.code(), Some(2));
}

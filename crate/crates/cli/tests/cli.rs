use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_nehari-cc");

fn run(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(BIN)
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const FIBER: &str = r#"{
  "exponents": { "p": 2.0, "q": 1.5, "gamma": 2.5 },
  "fiber": [ { "a": 1.0, "b": 1.0, "c": 1.0, "lambda": 0.2 } ]
}"#;

const ONE_DOF: &str = r#"{
  "exponents": { "p": 2.0, "q": 1.5, "gamma": 2.5 },
  "domain": { "dimension": 1, "cells": [2] },
  "weight": { "constant": { "value": 1.0 } },
  "lambda_grid": { "fractions_of_star": [0.25, 0.5] },
  "continuation": { "enabled": false }
}"#;

#[test]
fn exponent_ordering_violation_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = FIBER.replace("\"q\": 1.5", "\"q\": 2.2");
    let o = run(dir.path(), "fiber-analyze", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("q < p"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = FIBER.replace("\"fiber\"", "\"colour\": 1, \"fiber\"");
    let o = run(dir.path(), "fiber-analyze", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn nonpositive_weight_exits_three() {
    let dir = TempDir::new().unwrap();
    let cfg = ONE_DOF.replace("\"value\": 1.0", "\"value\": -1.0");
    let o = run(dir.path(), "lambda-star", &cfg, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("hypothesis"), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(report.contains("[error]"));
}

#[test]
fn unwritable_output_directory_exits_five() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, FIBER).unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = Command::new(BIN)
        .args(["fiber-analyze", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("out"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
}

#[test]
fn fiber_analyze_reports_case_one_roots() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "fiber-analyze", FIBER, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/fiber.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let get = |k: &str| row.get(headers.iter().position(|h| h == k).unwrap()).unwrap().to_string();
    assert_eq!(get("case"), "I");
    let tp: f64 = get("t_plus").parse().unwrap();
    let tm: f64 = get("t_minus").parse().unwrap();
    assert!((tp - 0.0763932).abs() < 1e-7, "{tp}");
    assert!((tm - 0.5236068).abs() < 1e-7, "{tm}");
}

#[test]
fn lambda_star_on_one_node_is_sixteen() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "lambda-star", ONE_DOF, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(report.contains("lambda_star = 16.0000000"), "{report}");
    assert!(report.contains("[config]"));
}

#[test]
fn branch_csv_has_fixed_header() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "solve-branches", ONE_DOF, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/branches.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("branch,lambda,energy,residual,H,min_interior,norm"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn empty_grid_reports_no_points() {
    let dir = TempDir::new().unwrap();
    let cfg = ONE_DOF.replace("{ \"fractions_of_star\": [0.25, 0.5] }", "{ \"values\": [] }");
    let o = run(dir.path(), "solve-branches", &cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(report.contains("no points"), "{report}");
}

#[test]
fn decreasing_grid_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = ONE_DOF.replace("[0.25, 0.5]", "[0.5, 0.25]");
    let o = run(dir.path(), "solve-branches", &cfg, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn newton_budget_exhaustion_exits_four_with_best_iterate() {
    let dir = TempDir::new().unwrap();
    let cfg = ONE_DOF.replace(
        "\"continuation\"",
        "\"branches\": { \"tol\": 1e-300, \"max_iter\": 2000, \"newton_max_iter\": 1 },\n  \"continuation\"",
    );
    let o = run(dir.path(), "solve-branches", &cfg, &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let best = fs::read_to_string(dir.path().join("out/best_iterate.csv")).unwrap();
    assert!(best.starts_with("index,value\n"));
}

#[test]
fn runs_are_deterministic_and_seed_overrides_config() {
    let sine = r#"{
  "exponents": { "p": 2.0, "q": 1.5, "gamma": 2.5 },
  "domain": { "dimension": 1, "cells": [16] },
  "weight": { "sine": { "amplitude": 1.0, "frequency": 1.0, "offset": 0.5 } },
  "extremal": { "starts": 4, "tol": 1e-12, "max_iter": 10000 },
  "seed": 3
}"#;
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let oa = run(a.path(), "lambda-star", sine, &["--seed", "11"]);
    let ob = run(b.path(), "lambda-star", sine, &["--seed", "11"]);
    assert_eq!(oa.status.code(), Some(0), "{}", stderr(&oa));
    assert_eq!(ob.status.code(), Some(0), "{}", stderr(&ob));
    for f in ["lambda_star.csv", "witness.csv"] {
        assert_eq!(
            fs::read(a.path().join("out").join(f)).unwrap(),
            fs::read(b.path().join("out").join(f)).unwrap(),
            "{f}"
        );
    }
    let report = fs::read_to_string(a.path().join("out/report.txt")).unwrap();
    assert!(report.contains("\"seed\": 11"), "{report}");
}

//! End-to-end checks of the command-line interface: every subcommand,
//! both output formats, and the documented exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adgap"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout must be JSON")
}

fn csv_rows(output: &Output, header: &str) -> Vec<Vec<String>> {
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header));
    lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn gen_writes_a_loadable_graph() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("path6.graph");
    let output = bin()
        .args(["--out", path.to_str().unwrap(), "gen", "path", "6"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let g = adgap::graph::load_graph(&path).unwrap();
    assert_eq!(g.n(), 6);
    assert_eq!(g.m(), 10);
    assert!(adgap::graph::classify(&g).is_zero_bounded);
}

#[test]
fn gen_in_arborescence_points_at_the_root() {
    let output = bin()
        .args(["--seed", "3", "gen", "in-arb", "5", "--p", "0.5"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let g = adgap::graph::parse_graph(&text).unwrap();
    assert_eq!(g.n(), 5);
    assert!(adgap::graph::classify(&g).is_in_arborescence);
}

#[test]
fn gen_rejects_a_two_node_cycle() {
    let output = bin().args(["gen", "cycle", "2"]).output().unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("error"), "stderr: {err}");
}

#[test]
fn gen_uniform_probabilities_stay_in_range() {
    let output = bin()
        .args([
            "--seed",
            "9",
            "gen",
            "random",
            "6",
            "10",
            "--p-range",
            "0.2",
            "0.9",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let g = adgap::graph::parse_graph(&text).unwrap();
    assert!(g.edges().iter().all(|e| (0.2..=0.9).contains(&e.prob)));
}

#[test]
fn spread_exact_on_the_witness_path() {
    let output = bin()
        .args(["spread", fixture("witness-path-4.graph").to_str().unwrap()])
        .args(["--seeds", "0,2"])
        .output()
        .unwrap();
    let report = stdout_json(&output);
    assert_eq!(report["mode"], "exact");
    assert!((report["value"].as_f64().unwrap() - 3.0).abs() <= 1e-12);
}

#[test]
fn spread_of_the_empty_seed_set_is_zero() {
    let output = bin()
        .args(["spread", fixture("witness-path-4.graph").to_str().unwrap()])
        .output()
        .unwrap();
    let report = stdout_json(&output);
    assert_eq!(report["seeds"].as_array().unwrap().len(), 0);
    assert_eq!(report["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn spread_monte_carlo_tracks_the_exact_value() {
    let path = fixture("witness-path-5.graph");
    let exact = stdout_json(
        &bin()
            .args(["spread", path.to_str().unwrap(), "--seeds", "0"])
            .output()
            .unwrap(),
    )["value"]
        .as_f64()
        .unwrap();
    let mc = stdout_json(
        &bin()
            .args(["--seed", "7", "spread", path.to_str().unwrap()])
            .args(["--seeds", "0", "--samples", "20000"])
            .output()
            .unwrap(),
    );
    assert_eq!(mc["mode"], "mc");
    let err = (mc["value"].as_f64().unwrap() - exact).abs();
    assert!(err <= 4.0 * mc["stderr"].as_f64().unwrap());
}

#[test]
fn opt_reports_both_oracles_on_the_witness_path() {
    let output = bin()
        .args(["opt", fixture("witness-path-4.graph").to_str().unwrap()])
        .args(["-k", "2"])
        .output()
        .unwrap();
    let report = stdout_json(&output);
    let best = &report["nonadaptive"]["per_budget"][2];
    assert_eq!(best["seeds"], serde_json::json!([0, 2]));
    assert!((best["value"].as_f64().unwrap() - 3.0).abs() <= 1e-12);
    let root = &report["adaptive"]["root"];
    assert_eq!(root["seed"], 0);
    assert!((root["value"].as_f64().unwrap() - 3.25).abs() <= 1e-12);
    let x: Vec<f64> = report["marginals"]["x"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (got, want) in x.iter().zip([1.0, 0.625, 0.25, 0.125]) {
        assert!((got - want).abs() <= 1e-12, "marginals {x:?}");
    }
}

#[test]
fn opt_csv_lists_every_budget_and_marginal() {
    let output = bin()
        .args(["--format", "csv"])
        .args(["opt", fixture("witness-path-4.graph").to_str().unwrap()])
        .args(["-k", "2"])
        .output()
        .unwrap();
    let rows = csv_rows(&output, "kind,index,value,nodes");
    let kinds: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(kinds.iter().filter(|k| **k == "nonadaptive").count(), 3);
    assert_eq!(kinds.iter().filter(|k| **k == "adaptive").count(), 1);
    assert_eq!(kinds.iter().filter(|k| **k == "marginal").count(), 4);
    assert!(rows.iter().all(|r| r.len() == 4));
}

#[test]
fn gap_confirms_the_witness_ratio() {
    let output = bin()
        .args(["gap", fixture("witness-path-4.graph").to_str().unwrap()])
        .args(["-k", "2"])
        .output()
        .unwrap();
    let report = stdout_json(&output);
    assert!((report["ratio"].as_f64().unwrap() - 13.0 / 12.0).abs() <= 1e-12);
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["pass"].as_bool().unwrap()));
}

#[test]
fn gap_is_one_when_every_edge_is_certain() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sure.graph");
    let generated = bin()
        .args(["--out", path.to_str().unwrap()])
        .args(["gen", "path", "4", "--p", "1.0"])
        .output()
        .unwrap();
    assert!(generated.status.success());
    let output = bin()
        .args(["gap", path.to_str().unwrap(), "-k", "2"])
        .output()
        .unwrap();
    let report = stdout_json(&output);
    assert_eq!(report["ratio"].as_f64().unwrap(), 1.0);
}

#[test]
fn gap_refuses_graphs_over_the_enumeration_cap() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.graph");
    let generated = bin()
        .args(["--out", path.to_str().unwrap()])
        .args(["gen", "random", "8", "24"])
        .output()
        .unwrap();
    assert!(generated.status.success());
    let output = bin()
        .args(["gap", path.to_str().unwrap(), "-k", "2"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("exceeds the cap"), "stderr: {err}");
}

#[test]
fn verify_smoke_suite_exits_zero() {
    let output = bin().args(["verify", "--suite", "smoke"]).output().unwrap();
    let report = stdout_json(&output);
    assert_eq!(report["summary"]["pass"], true);
    assert_eq!(report["summary"]["failed"], 0);
    assert_eq!(report["instances"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_self_test_exits_nonzero() {
    let output = bin()
        .args(["verify", "--suite", "smoke", "--self-test"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let report: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["summary"]["pass"], false);
    assert_eq!(report["summary"]["failed"], 1);
}

#[test]
fn verify_filter_keeps_one_family() {
    let output = bin().args(["verify", "--filter", "path"]).output().unwrap();
    let report = stdout_json(&output);
    let instances = report["instances"].as_array().unwrap();
    assert!(!instances.is_empty());
    assert!(instances.iter().all(|i| i["family"] == "path"));
}

#[test]
fn verify_csv_has_one_row_per_check() {
    let output = bin()
        .args(["--format", "csv", "verify", "--suite", "smoke"])
        .output()
        .unwrap();
    let rows = csv_rows(&output, "instance,class,k,check,value,slack,pass");
    assert!(rows.len() > 4);
    assert!(rows.iter().all(|r| r.len() == 7));
}

#[test]
fn sweep_in_arborescence_rises_toward_its_limit() {
    let output = bin()
        .args(["--format", "csv", "sweep", "--bound", "in-arborescence"])
        .args(["--k-max", "50"])
        .output()
        .unwrap();
    let rows = csv_rows(&output, "bound,k,alpha,value,closed_form,reference");
    assert_eq!(rows.len(), 49);
    let values: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(values[0], 2.0);
    assert!(values.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    let limit = 2.0 * (1.0f64).exp().powi(2) / ((1.0f64).exp().powi(2) - 1.0);
    assert!(*values.last().unwrap() <= limit + 1e-9);
}

#[test]
fn sweep_zero_bounded_stays_under_its_limit() {
    let output = bin()
        .args(["--format", "csv", "sweep", "--bound", "zero-bounded"])
        .args(["--k-max", "40"])
        .output()
        .unwrap();
    let rows = csv_rows(&output, "bound,k,alpha,value,closed_form,reference");
    for row in rows {
        let k: u32 = row[1].parse().unwrap();
        let value: f64 = row[3].parse().unwrap();
        if k >= 4 {
            assert!(value <= 3.16, "k={k} value={value}");
        } else {
            assert_eq!(value, f64::from(k));
        }
    }
}

#[test]
fn sweep_alpha_bounded_never_beats_the_closed_form() {
    let output = bin()
        .args(["--format", "csv", "sweep", "--bound", "alpha-bounded"])
        .args(["--k-max", "30", "--alpha-max", "10"])
        .output()
        .unwrap();
    let rows = csv_rows(&output, "bound,k,alpha,value,closed_form,reference");
    assert_eq!(rows.len(), 29 * 11);
    for row in rows {
        let value: f64 = row[3].parse().unwrap();
        let closed: f64 = row[4].parse().unwrap();
        assert!(value <= closed + 1e-9, "row {row:?}");
    }
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use tempfile::TempDir;

fn ph(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ph"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn workspace(files: &[(&str, &str)]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in files {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, path: &str) -> String {
    fs::read_to_string(dir.join(path)).unwrap()
}

const UNIFORM: &str = r#"
n = 5
seed = 3
[process]
type = "binomial"
dim = 2
density = { kind = "uniform" }
"#;

#[test]
fn sample_writes_one_row_per_point() {
    let dir = workspace(&[("s.toml", UNIFORM)]);
    let out = ph(dir.path(), &["sample", "--config", "s.toml", "--out", "o"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = read(dir.path(), "o/cloud.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x1,x2");
    assert_eq!(lines.len(), 6);
    for line in &lines[1..] {
        for x in line.split(',') {
            let x: f64 = x.parse().unwrap();
            assert!((0.0..=1.0).contains(&x));
        }
    }
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path(), "o/manifest.json")).unwrap();
    assert_eq!(manifest["command"], "sample");
    assert_eq!(manifest["master_seed"], 3);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn sample_overrides_change_the_draw() {
    let dir = workspace(&[("s.toml", UNIFORM)]);
    assert!(ph(dir.path(), &["sample", "--config", "s.toml", "--out", "a"])
        .status
        .success());
    assert!(ph(
        dir.path(),
        &["sample", "--config", "s.toml", "--out", "b", "--seed", "4", "--n", "7"]
    )
    .status
    .success());
    assert_eq!(read(dir.path(), "b/cloud.csv").lines().count(), 8);
    assert_ne!(read(dir.path(), "a/cloud.csv"), read(dir.path(), "b/cloud.csv"));
}

#[test]
fn malformed_partition_is_a_config_error() {
    let bad = r#"
n = 5
[process]
type = "binomial"
dim = 1
density = { kind = "boxes", blocks = [{ lo = [0.0], hi = [0.4] }, { lo = [0.5], hi = [1.0] }], weights = [1.0, 1.0] }
"#;
    let dir = workspace(&[("bad.toml", bad)]);
    let out = ph(dir.path(), &["sample", "--config", "bad.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("blocks"), "{}", stderr(&out));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn unknown_fields_name_their_path() {
    let bad = "n = 5\n[process]\ntype = \"binomial\"\ndim = 1\ndensity = { kind = \"uniform\", extra = 1 }\n";
    let dir = workspace(&[("bad.toml", bad)]);
    let out = ph(dir.path(), &["sample", "--config", "bad.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("process"), "{}", stderr(&out));
    assert!(stderr(&out).contains("extra"), "{}", stderr(&out));
}

#[test]
fn diagram_of_a_square_has_one_loop() {
    // Corners of a square of side 0.5: every point joins at 0.5 and the
    // loop is filled when the diagonals (length 0.5√2) enter.
    let square = "x1,x2\n0.25,0.25\n0.75,0.25\n0.75,0.75\n0.25,0.75\n";
    let dir = workspace(&[("square.csv", square)]);
    let out = ph(
        dir.path(),
        &[
            "diagram",
            "--input",
            "square.csv",
            "--kind",
            "rips",
            "--max-dim",
            "2",
            "--max-radius",
            "1.0",
            "--output",
            "d.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = read(dir.path(), "d.csv");
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let zeros: Vec<_> = rows.iter().filter(|r| r[0] == "0").collect();
    let ones: Vec<_> = rows.iter().filter(|r| r[0] == "1").collect();
    assert_eq!(zeros.len(), 4);
    assert_eq!(zeros.iter().filter(|r| r[2] == "inf").count(), 1);
    assert!(zeros
        .iter()
        .filter(|r| r[2] != "inf")
        .all(|r| r[2].parse::<f64>().unwrap() == 0.5));
    assert_eq!(ones.len(), 1);
    assert_eq!(ones[0][1].parse::<f64>().unwrap(), 0.5);
    assert!((ones[0][2].parse::<f64>().unwrap() - 0.5 * 2f64.sqrt()).abs() < 1e-12);
}

const BETTI: &str = r#"
direct = true
[sample]
n = 40
seed = 4
process = { type = "binomial", dim = 2, density = { kind = "uniform" } }
[complex]
kind = "rips"
max_dim = 2
max_radius = 0.4
[[queries]]
q = 0
r = 0.05
s = 0.1
[[queries]]
q = 1
r = 0.2
s = 0.25
"#;

#[test]
fn betti_reports_both_evaluations() {
    let dir = workspace(&[("b.toml", BETTI)]);
    let out = ph(dir.path(), &["betti", "--config", "b.toml", "--out", "o"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = read(dir.path(), "o/betti.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("q,r,s,betti,direct"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row[3], row[4]);
    }
}

#[test]
fn exceeding_the_simplex_budget_exits_three() {
    let config = BETTI.replace("max_radius = 0.4", "max_radius = 0.4\nbudget = 50");
    let dir = workspace(&[("b.toml", &config)]);
    let out = ph(dir.path(), &["betti", "--config", "b.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn bounds_table_marks_trivial_rows() {
    let config = "kind = \"kernel\"\nt_grid = [0.0, 10.0]\nf_star = 1.0\nn_mu = 1.0\n";
    let dir = workspace(&[("k.toml", config)]);
    let out = ph(dir.path(), &["bounds", "--config", "k.toml", "--out", "o"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = read(dir.path(), "o/bounds.csv");
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][2], "true");
    assert_eq!(rows[1][2], "false");
    let b: f64 = rows[1][1].parse().unwrap();
    assert!((b - (std::f64::consts::E - 11.0).exp()).abs() < 1e-15);
}

#[test]
fn lemma_experiment_passes() {
    let config = "suite = \"lemma\"\nmaster_seed = 5\n[lemma]\nn_max = 10\ntrials = 100\n";
    let dir = workspace(&[("l.toml", config)]);
    let out = ph(dir.path(), &["experiment", "--config", "l.toml", "--out", "o"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "o/summary.json")).unwrap();
    assert_eq!(summary["status"], "pass");
}

const LIMIT: &str = r#"
suite = "limit"
master_seed = 1
n_grid = [50, 100]
replications = 10
flags_fatal = false

[process]
type = "blocked_chain"
dim = 2
density = { kind = "grid", m = 2, weights = [1.5, 0.5, 0.5, 1.5] }
hidden = { kind = "sticky", stay = 0.6 }

[complex]
kind = "rips"
max_dim = 2
max_radius = 1.2

[[queries]]
q = 0
r = 0.6
s = 0.8

[[queries]]
q = 1
r = 0.8
s = 1.0
"#;

#[test]
fn small_limit_experiment_is_quick_and_complete() {
    let dir = workspace(&[("l.toml", LIMIT)]);
    let start = Instant::now();
    let out = ph(dir.path(), &["experiment", "--config", "l.toml", "--out", "o"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(start.elapsed() < Duration::from_secs(60));
    for file in [
        "estimates.csv",
        "raw_process.csv",
        "raw_oracle.csv",
        "comparisons.csv",
        "summary.json",
        "manifest.json",
    ] {
        assert!(dir.path().join("o").join(file).exists(), "{file}");
    }
    // Two sizes, two queries, ten replications.
    assert_eq!(read(dir.path(), "o/raw_process.csv").lines().count(), 1 + 2 * 2 * 10);
}

#[test]
fn dry_run_writes_nothing() {
    let dir = workspace(&[("l.toml", LIMIT)]);
    let out = ph(
        dir.path(),
        &["experiment", "--config", "l.toml", "--out", "o", "--dry-run"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(!dir.path().join("o").exists());
    let plan: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(plan["suite"], "limit");
}

#[test]
fn flags_are_fatal_unless_waived() {
    // A zero tolerance flags every trajectory that moves at all.
    let config = r#"
suite = "slln"
master_seed = 2
n_grid = [50, 100, 200]
slln_tolerance = 0.0
[process]
type = "binomial"
dim = 2
density = { kind = "uniform" }
[complex]
kind = "rips"
max_dim = 1
max_radius = 1.0
[[queries]]
q = 0
r = 0.8
s = 0.8
"#;
    let dir = workspace(&[("s.toml", config)]);
    let out = ph(dir.path(), &["experiment", "--config", "s.toml", "--out", "a"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(dir.path().join("a/trajectory.csv").exists());
    let out = ph(
        dir.path(),
        &["experiment", "--config", "s.toml", "--out", "b", "--flags-nonfatal"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn missing_suite_inputs_are_config_errors() {
    let dir = workspace(&[("e.toml", "suite = \"limit\"\nmaster_seed = 1\n")]);
    let out = ph(dir.path(), &["experiment", "--config", "e.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("process"), "{}", stderr(&out));
}

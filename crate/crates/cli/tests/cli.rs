//! End-to-end runs of the `saddle` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const EXIT_OK: i32 = 0;
const EXIT_VIOLATION: i32 = 1;
const EXIT_USAGE: i32 = 3;

fn saddle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saddle")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn acceptance_config() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/st2_i.toml");
    fs::read_to_string(path).unwrap()
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn scalar_config(nodes: usize, ainf: &str, nonlinearity: &str) -> String {
    format!(
        "schema_version = 1\nseed = 5\ncase = \"none\"\n\n[grid]\ndimension = 1\nextents = [[0.0, 1.0]]\nnodes = [{nodes}]\n\n[ainf]\n{ainf}\n\n[nonlinearity]\n{nonlinearity}\n\n[solver.search]\nstarts = 12\n"
    )
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: PathBuf) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

/// Eigenvalues of the 1D Dirichlet stencil with `n` interior nodes on (0, 1).
fn stencil(n: usize) -> Vec<f64> {
    let h = 1.0 / (n as f64 + 1.0);
    (1..=n)
        .map(|j| 2.0 / (h * h) * (1.0 - (j as f64 * std::f64::consts::PI * h).cos()))
        .collect()
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    saddle(&full)
}

#[test]
fn eigen_identity_weight_doubles_the_stencil_spectrum() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "c.toml", &scalar_config(255, "family = \"identity\"", "family = \"zero\""));
    let o = run(&["eigen"], &config, dir.path());
    assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    let rows = read_csv(dir.path().join("spectrum_ainf.csv"));
    let oracle = stencil(255);
    assert_eq!(rows.len(), 255);
    for (row, exact) in rows.iter().zip(&oracle) {
        assert_eq!(&row[0], "1");
        assert_eq!(&row[3], "2");
        let value: f64 = row[2].parse().unwrap();
        assert!((value - exact).abs() <= 1e-9 * exact);
    }
    let json = read_json(dir.path().join("eigen.json"));
    assert_eq!(json["schema_version"], 1);
    assert!(json["generated_at"].is_string());
}

#[test]
fn eigen_diagonal_weight_merges_two_scaled_spectra() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "c.toml",
        &scalar_config(20, "family = \"diag\"\nvalues = [1.0, 4.0]", "family = \"zero\""),
    );
    let o = run(&["eigen"], &config, dir.path());
    assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    let mut oracle: Vec<f64> = stencil(20).iter().flat_map(|s| [*s, s / 4.0]).collect();
    oracle.sort_by(f64::total_cmp);
    let rows = read_csv(dir.path().join("spectrum_ainf.csv"));
    assert_eq!(rows.len(), 40);
    for (row, exact) in rows.iter().zip(&oracle) {
        assert_eq!(&row[3], "1");
        let value: f64 = row[2].parse().unwrap();
        assert!((value - exact).abs() <= 1e-9 * exact);
    }
}

#[test]
fn malformed_expression_is_a_usage_error_with_position() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "c.toml",
        &scalar_config(15, "family = \"identity\"", "family = \"expr\"\npotential = \"u*u + (v\"\nlambda = 2.0"),
    );
    let o = run(&["eigen"], &config, dir.path());
    assert_eq!(code(&o), EXIT_USAGE);
    assert!(stderr(&o).contains("position"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_reported_with_its_line() {
    let dir = TempDir::new().unwrap();
    let text = scalar_config(15, "family = \"identity\"", "family = \"zero\"").replace("seed = 5", "seed = 5\nsede = 6");
    let config = write_config(&dir, "c.toml", &text);
    let o = run(&["check"], &config, dir.path());
    assert_eq!(code(&o), EXIT_USAGE);
    assert!(stderr(&o).contains("sede") && stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn acceptance_config_passes_every_check() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "c.toml", &acceptance_config());
    let o = run(&["check"], &config, dir.path());
    assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    let json = read_json(dir.path().join("check.json"));
    assert_eq!(json["verdict"], "pass");
    let names: Vec<&str> = json["hypotheses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["name"].as_str().unwrap())
        .collect();
    for required in ["growth", "origin_sign", "infinity_sign", "monotonicity_bound"] {
        assert!(names.contains(&required));
    }
}

#[test]
fn low_monotonicity_bound_fails_the_ordering() {
    let dir = TempDir::new().unwrap();
    let text = acceptance_config() + "\n[beta]\nfamily = \"diag\"\nvalues = [0.0, 0.0]\n";
    let config = write_config(&dir, "c.toml", &text);
    let o = run(&["check"], &config, dir.path());
    assert_eq!(code(&o), EXIT_VIOLATION);
    let json = read_json(dir.path().join("check.json"));
    let bound = json["hypotheses"]
        .as_array()
        .unwrap()
        .iter()
        .find(|h| h["name"] == "monotonicity_bound")
        .unwrap()
        .clone();
    assert_eq!(bound["holds"], false);
    assert!(bound["message"].as_str().unwrap().contains("lambda_(k-1) A_inf"));
}

#[test]
fn case_none_checks_only_growth_and_consistency() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "c.toml", &scalar_config(15, "family = \"identity\"", "family = \"zero\""));
    let o = run(&["check"], &config, dir.path());
    assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    let json = read_json(dir.path().join("check.json"));
    let names: Vec<&str> = json["hypotheses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| h["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["growth", "gradient_consistency"]);
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("generated_at");
    v
}

#[test]
fn zero_nonlinearity_has_only_the_trivial_record_and_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "c.toml", &scalar_config(15, "family = \"identity\"", "family = \"zero\""));
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    for out in [&first, &second] {
        let o = run(&["solve"], &config, out);
        assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    }
    let a = read_json(first.join("records.json"));
    let records = a["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["trivial"], true);
    assert_eq!(a["prediction"]["note"], "theorem not applicable");
    assert_eq!(a["prediction_satisfied"], Value::Null);
    assert_eq!(without_timestamp(a), without_timestamp(read_json(second.join("records.json"))));
    assert_eq!(
        fs::read(first.join("records.csv")).unwrap(),
        fs::read(second.join("records.csv")).unwrap()
    );
}

#[test]
fn acceptance_instance_with_few_starts_satisfies_the_prediction() {
    let dir = TempDir::new().unwrap();
    let text = acceptance_config().replace("starts = 200", "starts = 24");
    let config = write_config(&dir, "c.toml", &text);
    let o = run(&["solve"], &config, dir.path());
    assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    let json = read_json(dir.path().join("records.json"));
    assert!(json["observed_nontrivial"].as_u64().unwrap() >= 2);
    assert_eq!(json["prediction"]["expected_nontrivial_at_least_two"], true);
    assert_eq!(json["prediction_satisfied"], true);
    assert!(dir.path().join("rays.csv").exists());
}

#[test]
fn failing_hypotheses_block_solve_unless_forced() {
    let dir = TempDir::new().unwrap();
    let text = acceptance_config().replace("starts = 200", "starts = 4") + "\n[beta]\nfamily = \"diag\"\nvalues = [0.0, 0.0]\n";
    let config = write_config(&dir, "c.toml", &text);
    let o = run(&["solve"], &config, dir.path());
    assert_eq!(code(&o), EXIT_VIOLATION);
    assert!(!dir.path().join("records.json").exists());
    let mut args = vec!["solve", "--force"];
    let (c, d) = (config.to_str().unwrap(), dir.path().to_str().unwrap());
    args.extend(["--config", c, "--out", d]);
    let o = saddle(&args);
    assert_ne!(code(&o), EXIT_USAGE, "{}", stderr(&o));
    let json = read_json(dir.path().join("records.json"));
    assert_eq!(json["forced"], true);
}

#[test]
fn verify_morse_and_shift_suites_hold() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    for suite in ["morse", "shift"] {
        let o = saddle(&["verify", suite, "--out", out]);
        assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    }
    let morse = read_json(dir.path().join("verify_morse.json"));
    assert_eq!(morse["status"], "holds");
    assert_eq!(morse["entries"][0]["details"]["q_coeffs"][0], 1);
    let rows = read_csv(dir.path().join("verify_shift.csv"));
    assert!(rows.len() >= 5);
    assert!(rows.iter().all(|r| &r[4] == "true" && &r[5] == "true"));

    let o = saddle(&["report", "--out", out]);
    assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verify_morse.json"));
}

#[test]
fn usage_errors_exit_with_three() {
    assert_eq!(code(&saddle(&["frobnicate"])), EXIT_USAGE);
    assert_eq!(code(&saddle(&["solve"])), EXIT_USAGE);
    assert_eq!(code(&saddle(&["eigen", "--config", "/nonexistent/run.toml"])), EXIT_USAGE);
    assert_eq!(code(&saddle(&["verify", "index", "--resolution", "30"])), EXIT_USAGE);
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&saddle(&["report", "--out", dir.path().to_str().unwrap()])), EXIT_USAGE);
    assert_eq!(code(&saddle(&["--help"])), EXIT_OK);
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn olskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_olskit")).args(args).output().unwrap()
}

fn run_in(out: &Path, command: &[&str], extra: &[(&str, PathBuf)]) -> Output {
    let mut args: Vec<String> = command.iter().map(|s| s.to_string()).collect();
    for (flag, path) in extra {
        args.push(flag.to_string());
        args.push(path.display().to_string());
    }
    args.push("--out".into());
    args.push(out.display().to_string());
    Command::new(env!("CARGO_BIN_EXE_olskit")).args(&args).output().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn unknown_command_exits_two_with_usage() {
    let out = olskit(&["bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn missing_out_is_an_input_error() {
    let out = olskit(&["krige", "--config", &fixture("config.json").display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn krige_reproduces_observations() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["krige"],
        &[
            ("--config", fixture("config.json")),
            ("--data", fixture("observed.csv")),
            ("--query", fixture("query.csv")),
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let predictions = read_csv(&dir.path().join("predictions.csv"));
    for row in read_csv(&fixture("observed.csv")) {
        let hit = predictions
            .iter()
            .find(|p| p[0] == row[0])
            .expect("observed point predicted");
        assert!((hit[1] - row[1]).abs() <= 1e-8, "{hit:?} vs {row:?}");
    }
    let r = report(dir.path());
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["pass"], true);
    assert!(!dir
        .path()
        .read_dir()
        .unwrap()
        .any(|e| e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn non_numeric_cell_located() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "i_1,v_1\n0.0,1.0\n0.5,abc\n").unwrap();
    let out = run_in(
        &dir.path().join("out"),
        &["krige"],
        &[
            ("--config", fixture("config.json")),
            ("--data", bad),
            ("--query", fixture("query.csv")),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 3 column 2"), "{err}");
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn schema_error_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(
        &config,
        r#"{"kernel":{"family":"se","lengthscale":-1,"variance":1},"seed":0}"#,
    )
    .unwrap();
    let out = run_in(
        &dir.path().join("out"),
        &["verify", "entropy"],
        &[("--config", config), ("--data", fixture("query.csv"))],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lengthscale"));
}

#[test]
fn verify_uii_reports_total_variation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify", "uii"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    assert!(r["metrics"]["total_variation"].as_f64().unwrap() >= 1.0 / 16.0);
    assert_eq!(r["metrics"]["forbidden_mass_convolution"].as_f64().unwrap(), 1.0 / 16.0);
}

#[test]
fn seed_flag_overrides_config() {
    let base = tempfile::tempdir().unwrap();
    let args = [
        ("--config", fixture("config.json")),
        ("--data", fixture("observed.csv")),
        ("--query", fixture("query.csv")),
    ];
    let a = base.path().join("a");
    let b = base.path().join("b");
    let c = base.path().join("c");
    run_in(&a, &["condition"], &args);
    run_in(&b, &["condition", "--seed", "8"], &args);
    run_in(&c, &["condition", "--seed", "7"], &args);
    assert_eq!(report(&b)["seed"], 8);
    assert_ne!(
        fs::read(a.join("samples.csv")).unwrap(),
        fs::read(b.join("samples.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("samples.csv")).unwrap(),
        fs::read(c.join("samples.csv")).unwrap()
    );
}

#[test]
fn classifiers_reproduce_training_labels() {
    let base = tempfile::tempdir().unwrap();
    let args = [
        ("--config", fixture("config.json")),
        ("--data", fixture("labels.csv")),
        ("--query", fixture("labels.csv")),
    ];
    let svm = base.path().join("svm");
    assert_eq!(run_in(&svm, &["classify-svm"], &args).status.code(), Some(0));
    let labels: Vec<f64> = read_csv(&fixture("labels.csv")).iter().map(|r| r[2]).collect();
    let predicted: Vec<f64> = read_csv(&svm.join("classifications.csv"))
        .iter()
        .map(|r| *r.last().unwrap())
        .collect();
    assert_eq!(labels, predicted);
    let fuzzy = base.path().join("fuzzy");
    assert_eq!(run_in(&fuzzy, &["classify-fuzzy"], &args).status.code(), Some(0));
}

#[test]
fn verification_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify", "gmt"], &[("--config", fixture("config.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(dir.path());
    assert_eq!(r["pass"], false);
    assert_eq!(r["checks"]["mean_squared_error_inequality"], true);
    assert_eq!(r["checks"]["bias_variance_identity"], true);
}

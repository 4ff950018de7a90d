//! End-to-end tests of the command-line surface.

use rspa::io::{load_indices, load_matrix, MatrixFormat};
use rspa::nnls::{default_max_iter, relative_error, DEFAULT_TOL};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::tempdir;

fn rspa_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rspa"))
}

fn run(args: &[&str]) -> Output {
    rspa_bin().args(args).output().expect("spawn rspa")
}

fn write_simplex_csv(path: &Path) {
    fs::write(path, "1,0,0.5\n0,1,0.5\n").unwrap();
}

fn write_outlier_csv(path: &Path) {
    fs::write(path, "2,0,0,1\n0,2,0,1\n0,0,2.2,0\n").unwrap();
}

#[test]
fn extract_spa_on_simplex() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("x.csv");
    let out = dir.path().join("idx.txt");
    write_simplex_csv(&input);

    let output = run(&[
        "extract",
        "--input",
        input.to_str().unwrap(),
        "--format",
        "csv",
        "--r",
        "2",
        "--algo",
        "spa",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    assert_eq!(fs::read_to_string(&out).unwrap(), "0\n1\n");

    let summary: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("summary is JSON");
    assert_eq!(summary["indices"], serde_json::json!([0, 1]));
    assert_eq!(summary["steps_completed"], serde_json::json!(2));
    assert!(summary["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn extract_rspa_rejects_outlier() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("x.csv");
    let out = dir.path().join("idx.txt");
    write_outlier_csv(&input);

    let output = run(&[
        "extract",
        "--input",
        input.to_str().unwrap(),
        "--format",
        "csv",
        "--r",
        "2",
        "--algo",
        "rspa",
        "--d",
        "2",
        "--p",
        "1",
        "--beta",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    assert_eq!(fs::read_to_string(&out).unwrap(), "0\n1\n");
}

#[test]
fn extract_output_is_reproducible() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("x.csv");
    write_outlier_csv(&input);

    let mut runs = Vec::new();
    for name in ["a.txt", "b.txt"] {
        let out = dir.path().join(name);
        let output = run(&[
            "extract",
            "--input",
            input.to_str().unwrap(),
            "--r",
            "2",
            "--algo",
            "rspa",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success());
        let mut summary: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
        summary.as_object_mut().unwrap().remove("wall_time_s");
        runs.push((fs::read(&out).unwrap(), summary));
    }
    // Index files byte-identical; summaries identical apart from timing.
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn evaluate_full_index_set_is_zero() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("x.csv");
    let indices = dir.path().join("idx.txt");
    write_simplex_csv(&input);
    fs::write(&indices, "0\n1\n2\n").unwrap();

    let output = run(&[
        "evaluate",
        "--input",
        input.to_str().unwrap(),
        "--indices",
        indices.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    let value: f64 = lines.next().unwrap().parse().unwrap();
    assert!(value <= 1e-8, "relative error {value}");
    assert!(lines.next().unwrap().ends_with('%'));
}

#[test]
fn extract_then_evaluate_composes() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("x.csv");
    let out = dir.path().join("idx.txt");
    write_outlier_csv(&input);

    let extract_out = run(&[
        "extract",
        "--input",
        input.to_str().unwrap(),
        "--r",
        "2",
        "--algo",
        "spa",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(extract_out.status.success());

    let eval_out = run(&[
        "evaluate",
        "--input",
        input.to_str().unwrap(),
        "--indices",
        out.to_str().unwrap(),
    ]);
    assert!(eval_out.status.success());
    let printed: f64 = String::from_utf8(eval_out.stdout)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .parse()
        .unwrap();

    let x = load_matrix(&input, MatrixFormat::Csv).unwrap();
    let k = load_indices(&out).unwrap();
    let expected = relative_error(&x, &k, DEFAULT_TOL, default_max_iter(k.len())).unwrap();
    assert!(
        (printed - expected).abs() <= 1e-10,
        "printed {printed}, library {expected}"
    );
}

#[test]
fn synth_then_extract_rawbin_pipeline() {
    let dir = tempdir().unwrap();
    let matrix = dir.path().join("inst.bin");

    let synth_out = run(&[
        "synth",
        "--m",
        "20",
        "--r",
        "5",
        "--n",
        "100",
        "--outliers",
        "0",
        "--seed",
        "11",
        "--out",
        matrix.to_str().unwrap(),
    ]);
    assert!(synth_out.status.success(), "{synth_out:?}");
    assert!(matrix.exists());
    assert!(dir.path().join("inst.bin.json").exists());

    let truth = load_indices(&dir.path().join("inst.bin.vertices.txt")).unwrap();
    assert_eq!(truth.len(), 5);

    let out = dir.path().join("idx.txt");
    let extract_out = run(&[
        "extract",
        "--input",
        matrix.to_str().unwrap(),
        "--format",
        "rawbin",
        "--r",
        "5",
        "--algo",
        "spa",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(extract_out.status.success(), "{extract_out:?}");
    let mut extracted = load_indices(&out).unwrap();
    let mut expected = truth.clone();
    extracted.sort_unstable();
    expected.sort_unstable();
    assert_eq!(extracted, expected);
}

#[test]
fn sweep_writes_csv() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("sweep.cfg");
    let out = dir.path().join("result.csv");
    fs::write(
        &config,
        "m_values = 15\nr = 4\nn = 30\nn_out = 2\ntrials = 3\nbase_seed = 5\nalgorithms = spa, rspa5:5:1:4\n",
    )
    .unwrap();

    let output = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "algorithm,m,mean_recovery,std_recovery,mean_time_s");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("spa,15,"));
    assert!(lines[2].starts_with("rspa5,15,"));
}

#[test]
fn usage_errors_exit_2() {
    let output = run(&["extract", "--bogus-flag"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(!output.stderr.is_empty());
}

#[test]
fn missing_file_exits_3() {
    let output = run(&[
        "extract",
        "--input",
        "/nonexistent/x.csv",
        "--r",
        "2",
        "--algo",
        "spa",
        "--out",
        "/tmp/unused-idx.txt",
    ]);
    assert_eq!(output.status.code(), Some(3));
    assert!(!output.stderr.is_empty());
}

#[test]
fn bad_algorithm_exits_3() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("x.csv");
    write_simplex_csv(&input);
    let output = run(&[
        "extract",
        "--input",
        input.to_str().unwrap(),
        "--r",
        "2",
        "--algo",
        "vca",
        "--out",
        dir.path().join("idx.txt").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(3));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scl_mon::trace_io::{read_trace, read_trace_from, trace_to_string};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scl-mon"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Glucose at 100 except 0.48 h (2% of the day) at 60.
fn dip_trace(dir: &Path) -> PathBuf {
    write(dir, "trace.csv", "time,G\n0,100\n10,60\n10.48,100\n24,100\n")
}

fn check(trace: &Path, spec: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["check", "--trace", trace.to_str().unwrap(), "--spec", spec.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn cumulative_hypoglycemia_tolerates_a_short_dip() {
    let dir = TempDir::new().unwrap();
    let trace = dip_trace(dir.path());
    let scl = write(dir.path(), "scl.scl", "<flat[0,24], 0.95> (G >= 70)\n");
    let stl = write(dir.path(), "stl.scl", "G[0,24] (G >= 70)\n");
    let both = write(dir.path(), "both.scl", "<flat[0,24], 0.95> (G >= 70)\nG[0,24] (G >= 70)\n");
    assert_eq!(code(&check(&trace, &scl, &[])), 0);
    assert_eq!(code(&check(&trace, &stl, &[])), 1);
    let out = check(&trace, &both, &[]);
    assert_eq!(code(&out), 1);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains(":1: satisfied"), "{text}");
    assert!(lines[1].contains(":2: violated"), "{text}");
}

#[test]
fn every_evaluator_gives_the_same_exit_code() {
    let dir = TempDir::new().unwrap();
    let trace = dip_trace(dir.path());
    let spec = write(dir.path(), "f.scl", "<flat[0,24], 0.95> (G >= 70)\n<exp(-0.1)[0,24], 0.99> (G >= 70)\n");
    for ev in ["efficient", "oracle", "incremental"] {
        assert_eq!(code(&check(&trace, &spec, &["--evaluator", ev])), 1, "{ev}");
    }
}

#[test]
fn malformed_csv_reports_the_line() {
    let dir = TempDir::new().unwrap();
    let trace = write(dir.path(), "bad.csv", "time,G\n0,100\n1,abc\n24,100\n");
    let spec = write(dir.path(), "f.scl", "G[0,1] (G >= 70)\n");
    let out = check(&trace, &spec, &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn duplicate_timestamp_is_an_error() {
    let dir = TempDir::new().unwrap();
    let trace = write(dir.path(), "dup.csv", "time,G\n0,100\n1,90\n1,80\n24,100\n");
    let spec = write(dir.path(), "f.scl", "G[0,1] (G >= 70)\n");
    let out = check(&trace, &spec, &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn parse_error_names_file_and_line() {
    let dir = TempDir::new().unwrap();
    let trace = dip_trace(dir.path());
    let spec = write(dir.path(), "f.scl", "# comment\nG[0,1] (G >= 70)\n<flat[0,1], 2> (G >= 1)\n");
    let out = check(&trace, &spec, &[]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("f.scl") && err.contains("3:"), "{err}");
}

#[test]
fn horizon_shortfall_names_formula_and_deficit() {
    let dir = TempDir::new().unwrap();
    let trace = dip_trace(dir.path());
    let spec = write(dir.path(), "f.scl", "G[0,1] (G >= 70)\nG[0,30] (G >= 70)\n");
    let out = check(&trace, &spec, &[]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("f.scl:2") && err.contains("G[0,30] (G >= 70)"), "{err}");
    assert!(err.contains("deficit 6"), "{err}");
}

#[test]
fn invalid_delta_is_an_error() {
    let dir = TempDir::new().unwrap();
    let trace = dip_trace(dir.path());
    let spec = write(dir.path(), "f.scl", "G[0,1] (G >= 70)\n");
    assert_eq!(code(&check(&trace, &spec, &["--delta", "-1"])), 2);
}

#[test]
fn csv_outputs() {
    let dir = TempDir::new().unwrap();
    let trace = dip_trace(dir.path());
    let spec = write(dir.path(), "f.scl", "\n<flat[0,12], 0.97> (G >= 70)\n");
    let out_dir = dir.path().join("out");
    let out = check(&trace, &spec, &["--out", out_dir.to_str().unwrap(), "--mode", "both"]);
    assert_eq!(code(&out), 1);
    let verdict = fs::read_to_string(out_dir.join("formula_2.verdict.csv")).unwrap();
    let mut lines = verdict.lines();
    assert_eq!(lines.next(), Some("start,end,truth"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.first().unwrap()[0], "0");
    assert_eq!(rows.last().unwrap()[1], "12");
    assert_eq!(rows.first().unwrap()[2], "false");
    assert_eq!(rows.last().unwrap()[2], "true");
    let rho = fs::read_to_string(out_dir.join("formula_2.rho.csv")).unwrap();
    assert!(rho.starts_with("time,rho\n0,"));
    assert!(rho.lines().count() > 100);
}

#[test]
fn json_output_schema() {
    let dir = TempDir::new().unwrap();
    let trace = dip_trace(dir.path());
    let spec = write(dir.path(), "f.scl", "<flat[0,12], 0.95> (G >= 70)\ntrue | G >= 0\n");
    let out_dir = dir.path().join("out");
    let out = check(&trace, &spec, &["--out", out_dir.to_str().unwrap(), "--mode", "both", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("formula_1.json")).unwrap()).unwrap();
    assert_eq!(v["line"], 1);
    assert_eq!(v["formula"], "<flat[0,12], 0.95> (G >= 70)");
    assert_eq!(v["satisfied"], true);
    assert_eq!(v["verdict"]["domain"], serde_json::json!([0.0, 12.0]));
    let segments = v["verdict"]["segments"].as_array().unwrap();
    for s in segments {
        assert!(s["start"].is_f64() && s["end"].is_f64() && s["truth"].is_boolean());
    }
    assert!(v["verdict"]["crossings"].is_array() && v["verdict"]["plateaus"].is_array());
    assert_eq!(v["robustness"]["tolerance"], 1e-6);
    let samples = v["robustness"]["samples"].as_array().unwrap();
    assert!(samples.iter().all(|s| s["time"].is_f64() && s["rho"].is_f64()));
    let inf: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("formula_2.json")).unwrap()).unwrap();
    assert_eq!(inf["robustness"]["samples"][0]["rho"], "inf");
}

#[test]
fn rho_command_writes_only_robustness() {
    let dir = TempDir::new().unwrap();
    let trace = dip_trace(dir.path());
    let spec = write(dir.path(), "f.scl", "G[0,12] (G >= 70)\n");
    let out_dir = dir.path().join("out");
    let out = run(&[
        "rho",
        "--trace",
        trace.to_str().unwrap(),
        "--spec",
        spec.to_str().unwrap(),
        "--time-grid",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(!out_dir.join("formula_1.verdict.csv").exists());
    let rho = fs::read_to_string(out_dir.join("formula_1.rho.csv")).unwrap();
    let rows: Vec<(f64, f64)> = rho
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 13);
    assert!((rows[0].1 + 10.0).abs() < 1e-5);
    assert!((rows[12].1 - 30.0).abs() < 1e-5);
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let mut files = Vec::new();
    for (i, seed) in ["5", "5", "6"].iter().enumerate() {
        let p = dir.path().join(format!("g{i}.csv"));
        let out = run(&["gen", "--kind", "glucose-like", "--seed", seed, "--noise-std", "5", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        files.push(fs::read(&p).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_ne!(files[0], files[2]);
}

#[test]
fn generated_traces_round_trip() {
    let dir = TempDir::new().unwrap();
    for kind in [
        vec!["--kind", "glucose-like", "--noise-std", "5"],
        vec!["--kind", "step-train", "--period", "2", "--duty", "0.3", "--duration", "23.5"],
        vec!["--kind", "sine-quantized", "--period", "3", "--quantum", "0.25", "--dt", "0.07"],
    ] {
        let p = dir.path().join("t.csv");
        let mut args = vec!["gen", "--seed", "2", "--out", p.to_str().unwrap()];
        args.extend(kind);
        assert_eq!(code(&run(&args)), 0);
        let s = read_trace(&p).unwrap();
        let again = read_trace_from(trace_to_string(&s).as_bytes()).unwrap();
        assert_eq!(s, again);
    }
}

#[test]
fn gen_rejects_bad_parameters() {
    let out = run(&["gen", "--kind", "step-train", "--duty", "1.5"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn noise_agreement_report() {
    let out = run(&["exp", "noise-agreement", "--n", "40", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 40);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["eventually"], "F[0,24] (G <= k)");
    assert_eq!(v["scl"], "<flat[0,24], 0.03> (G <= k)");
    assert!(v["eventually_agreement"].is_f64() && v["scl_agreement"].is_f64());
}

#[test]
fn thread_count_does_not_change_results() {
    let one = bin().env("SCL_MON_THREADS", "1").args(["exp", "noise-agreement", "--n", "30"]).output().unwrap();
    let three = bin().env("SCL_MON_THREADS", "3").args(["exp", "noise-agreement", "--n", "30"]).output().unwrap();
    assert_eq!(one.stdout, three.stdout);
    let bad = bin().env("SCL_MON_THREADS", "0").args(["exp", "noise-agreement", "--n", "3"]).output().unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn falsify_with_budget_one() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "f.scl", "G[0,24] (G >= 70)\n");
    let out_dir = dir.path().join("out");
    let out = run(&[
        "exp",
        "falsify",
        "--spec",
        spec.to_str().unwrap(),
        "--budget",
        "1",
        "--seed",
        "8",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["evaluations"], 1);
    assert_eq!(v["best_sample"], 0);
    assert!(v["params"]["baseline"].is_f64());
    let witness = read_trace(&out_dir.join("witness.csv")).unwrap();
    let low = witness.values().iter().copied().fold(f64::INFINITY, f64::min);
    assert!((v["min_robustness"].as_f64().unwrap() - (low - 70.0)).abs() < 1e-5);
}

#[test]
fn shipped_formula_files_parse_and_run() {
    let dir = TempDir::new().unwrap();
    let specs = Path::new(env!("CARGO_MANIFEST_DIR")).join("specs");
    let glucose = dir.path().join("g.csv");
    assert_eq!(code(&run(&["gen", "--kind", "glucose-like", "--seed", "1", "--duration", "30", "--out", glucose.to_str().unwrap()])), 0);
    let out = check(&glucose, &specs.join("glucose.scl"), &[]);
    assert!(matches!(code(&out), 0 | 1), "{}", stderr(&out));
    let insulin = write(dir.path(), "gi.csv", "time,G,I\n0,100,0\n5,60,0\n6,320,3\n8,150,3\n8.5,150,0\n30,100,0\n");
    let out = check(&insulin, &specs.join("insulin.scl"), &["--mode", "both"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

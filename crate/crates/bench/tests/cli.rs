use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::NamedTempFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_infoest"))
}

fn file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exact_bootstrap_of_two_singletons() {
    let f = file("1 1\n");
    let v = json(&run(&["est-entropy", f.path().to_str().unwrap(), "--exact"]));
    assert_eq!(v["value_bits"], 1.5);
    assert_eq!(v["method"], "boot-exact");
    for key in ["stderr_bits", "replicates", "seed", "degenerate"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn counts_from_stdin() {
    let mut child = bin()
        .args(["est-entropy", "--method", "naive"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"5,5").unwrap();
    let v = json(&child.wait_with_output().unwrap());
    assert!((v["value_bits"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn mi_methods_and_csv() {
    let f = file("10,0\n0,10\n");
    let path = f.path().to_str().unwrap();
    let naive = json(&run(&["est-mi", path, "--method", "naive"]));
    assert!((naive["value_bits"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let ww = json(&run(&["est-mi", path, "--method", "ww", "--beta", "1"]));
    assert!(ww["value_bits"].as_f64().unwrap() < 1.0);
    let out = run(&["est-mi", path, "--replicates", "200", "--seed", "4", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("value_bits,stderr_bits,method,replicates,seed,degenerate"));
    assert!(text.contains(",boot,200,4,"));
}

#[test]
fn jsd_and_kl() {
    let (a, b) = (file("4 0"), file("0 4"));
    let v = json(&run(&["est-jsd", a.path().to_str().unwrap(), b.path().to_str().unwrap(), "--method", "naive"]));
    assert!((v["value_bits"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let (p, q) = (file("0.5 0.5"), file("1 0"));
    let v = json(&run(&["kl", p.path().to_str().unwrap(), q.path().to_str().unwrap()]));
    assert!(v["value_bits"].is_null() || v["value_bits"].as_f64() == Some(f64::INFINITY));
}

#[test]
fn decision_commands() {
    let (p, q) = (file("0.5 0.5"), file("0.5 0.5"));
    let (p, q) = (p.path().to_str().unwrap(), q.path().to_str().unwrap());
    let v = json(&run(&["bhatta", p, q, "--alpha", "0.76", "--n-max", "3"]));
    assert!((v["curve"][0].as_f64().unwrap() - 0.42708).abs() < 1e-5);
    let v = json(&run(&["lin-bound", p, q, "--alpha", "0.76"]));
    assert!((v["lin_bound"].as_f64().unwrap() - 0.3975205).abs() < 1e-6);
    let out = run(&["bhatta", p, q, "--alpha", "0.76", "--target", "0.1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn input_errors_exit_two() {
    let f = file("1 x 3");
    assert_eq!(run(&["est-entropy", f.path().to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["est-entropy", "/nonexistent/counts"]).status.code(), Some(2));
    let p = file("0.5 0.6");
    let q = file("0.5 0.5");
    let out = run(&["kl", p.path().to_str().unwrap(), q.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lag_mi_and_prior_sample() {
    let series: String = (0..60).map(|i| format!("{}\n", (i * 7 / 3) % 4)).collect();
    let a = file(&series);
    let out = run(&[
        "lag-mi",
        a.path().to_str().unwrap(),
        a.path().to_str().unwrap(),
        "--from",
        "-2",
        "--to",
        "2",
        "--replicates",
        "50",
    ]);
    let v = json(&out);
    let offsets: Vec<i64> = v.as_array().unwrap().iter().map(|r| r["offset"].as_i64().unwrap()).collect();
    assert_eq!(offsets, vec![-2, -1, 0, 1, 2]);

    let v = json(&run(&["prior-sample", "--k", "5", "--count", "3", "--prior", "nsb", "--seed", "2"]));
    assert_eq!(v.as_array().unwrap().len(), 3);
    for p in v.as_array().unwrap() {
        let s: f64 = p.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
}

#[test]
fn bench_table_csv() {
    let out = run(&[
        "bench",
        "bias-rms",
        "--k",
        "4",
        "--trials",
        "200",
        "--factors",
        "1,2",
        "--estimators",
        "naive,boot",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "factor,naive,boot");
    assert!(run(&["bench", "bias-rms", "--k", "4", "--shape", "2x2"]).status.code() == Some(2));
}

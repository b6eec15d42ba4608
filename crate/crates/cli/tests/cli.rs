use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curvjet::curvature::kn_pair;
use curvjet::jet::{random_einstein_one_jet, OneJet, TwoJet};
use curvjet::young::random_ck;
use curvjet::{Space, Tensor};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvjet")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn write<T: serde::Serialize>(dir: &TempDir, name: &str, value: &T) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(value).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn eigenvalue_suite_passes() {
    let o = run(&["check", "--suite", "eigenvalue", "--dim", "3", "--seeds", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = stdout_json(&o);
    assert_eq!(doc["tool"], "curvjet");
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["config"]["dims"], serde_json::json!([3]));
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn impossible_tolerance_fails_with_exit_1() {
    let o = run(&["check", "--suite", "eigenvalue", "--dim", "3", "--seeds", "3", "--tol", "1e-30"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout_json(&o)["pass"], false);
}

#[test]
fn printed_suite_fails() {
    let o = run(&["check", "--suite", "printed", "--dim", "4", "--seeds", "2"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["check", "--suite", "nope"][..],
        &["check", "--suite", "rr", "--tol", "0"],
        &["check", "--suite", "rr", "--dim", "3", "--signature", "1,1,1,1"],
        &["check", "--suite", "rr", "--seeds", "0"],
        &["fit"],
        &["extend", "--dim", "4"],
        &["frobnicate"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn indefinite_signature_with_leading_minus() {
    let o = run(&["check", "--suite", "eigenvalue", "--signature", "-1,1,1,1", "--seeds", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = stdout_json(&o);
    assert_eq!(doc["config"]["signature"], serde_json::json!([-1, 1, 1, 1]));
    assert!(doc["checks"][0]["name"].as_str().unwrap().contains("n4(-+++)"));
}

#[test]
fn text_format() {
    let o = run(&["check", "--suite", "sphere", "--dim", "4", "--format", "text"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("curvjet "));
    assert!(text.contains("PASS sphere.n4.half_is_n_minus_1"));
    assert!(text.trim_end().ends_with("summary PASS (3 checks, 0 failed)"), "{text}");
}

#[test]
fn runs_are_deterministic() {
    let args = ["check", "--suite", "rr", "--dim", "4", "--seeds", "4", "--seed", "9"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let gen = ["gen", "--kind", "two-jet", "--dim", "3", "--seed", "4"];
    let a = run(&gen);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, run(&gen).stdout);
    assert_ne!(a.stdout, run(&["gen", "--kind", "two-jet", "--dim", "3", "--seed", "5"]).stdout);
}

#[test]
fn extend_constant_curvature_then_check() {
    let dir = TempDir::new().unwrap();
    let one = dir.path().join("one.json");
    let two = dir.path().join("two.json");
    let o = run(&["gen", "--kind", "constant-one-jet", "--dim", "4", "--out", s(&one)]);
    assert_eq!(code(&o), 0);
    let o = run(&["extend", "--in", s(&one), "--out", s(&two)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["info"]["solution_dim"], 42.0);
    let o = run(&["check", "--suite", "einstein", "--in", s(&two)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let doc = stdout_json(&o);
    let names: Vec<&str> = doc["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"einstein.verdicts_agree"));
    assert!(names.iter().any(|n| n.starts_with("validate.")));
}

#[test]
fn extend_random_einstein_one_jet() {
    let dir = TempDir::new().unwrap();
    let one = random_einstein_one_jet(&Space::new(4, vec![1, -1, 1, 1]).unwrap(), 3).unwrap();
    let input = write(&dir, "one.json", &one);
    let out = dir.path().join("two.json");
    let o = run(&["extend", "--in", s(&input), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let jet: TwoJet = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((jet.r, jet.dr), (one.r, one.dr));
}

#[test]
fn extend_zero_input_gives_zero_jet() {
    let dir = TempDir::new().unwrap();
    let sp = Space::euclidean(3);
    let zero = OneJet::new(Tensor::zeros(&sp, 4), Tensor::zeros(&sp, 5)).unwrap();
    let input = write(&dir, "zero.json", &zero);
    let out = dir.path().join("two.json");
    let o = run(&["extend", "--in", s(&input), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let jet: TwoJet = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(jet, TwoJet::zeros(&sp));
}

#[test]
fn extend_rejects_non_einstein_input() {
    let dir = TempDir::new().unwrap();
    let one = dir.path().join("one.json");
    assert_eq!(code(&run(&["gen", "--kind", "one-jet", "--dim", "4", "--out", s(&one)])), 0);
    let o = run(&["extend", "--in", s(&one)]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("ric ∉ ℝ·g"), "{err}");
}

#[test]
fn malformed_input_is_a_failure_not_a_crash() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"r\": 1}").unwrap();
    for cmd in ["fit", "extend"] {
        let o = run(&[cmd, "--in", s(&p)]);
        assert_eq!(code(&o), 1, "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
    let o = run(&["fit", "--in", s(&dir.path().join("missing.json"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn fit_symmetric_jet_gives_zero() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("sym.json");
    assert_eq!(code(&run(&["gen", "--kind", "symmetric", "--dim", "4", "--out", s(&p)])), 0);
    let o = run(&["fit", "--in", s(&p)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let doc = stdout_json(&o);
    assert_eq!(doc["result"]["c"], 0.0);
    assert_eq!(doc["result"]["residual"], 0.0);
}

#[test]
fn fit_coefficient_is_linear_in_the_second_derivative() {
    // (g⊼g, 0, X/80) with X in C_2, then with 2X/80
    let dir = TempDir::new().unwrap();
    let sp = Space::euclidean(4);
    let g = Tensor::metric(&sp);
    let fit_c = |d2: Tensor, name: &str| -> f64 {
        let jet = TwoJet::new(kn_pair(&g, &g), Tensor::zeros(&sp, 5), d2).unwrap();
        let p = write(&dir, name, &jet);
        let o = run(&["fit", "--in", s(&p)]);
        stdout_json(&o)["result"]["c"].as_f64().unwrap()
    };
    let x = random_ck(&sp, 2, 1) * (1.0 / 80.0);
    let c1 = fit_c(x.clone(), "one.json");
    let c2 = fit_c(&x * 2.0, "two.json");
    assert!(c1.abs() > 0.0);
    assert!((c2 - 2.0 * c1).abs() <= 1e-12 * c1.abs(), "{c1} {c2}");
}

#[test]
fn metric_writes_a_valid_jet() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("metric.json");
    let j = dir.path().join("jet.json");
    assert_eq!(code(&run(&["gen", "--kind", "metric", "--dim", "3", "--seed", "2", "--out", s(&m)])), 0);
    let o = run(&["metric", "--in", s(&m), "--out", s(&j)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = run(&["check", "--suite", "validate", "--in", s(&j)]);
    assert_eq!(code(&o), 0);
    let o = run(&["check", "--suite", "rr", "--in", s(&j)]);
    assert_eq!(code(&o), 2);
}

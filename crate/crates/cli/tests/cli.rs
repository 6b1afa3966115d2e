use std::path::PathBuf;
use std::process::{Command, Output};

use orthowg::expr::{ExpressionFile, TraceExpression};
use orthowg::scalar::format_rational;
use orthowg::verify::cumulant_by_moments;
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orthowg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn wg_single_entry() {
    let out = run(&["wg", "--n", "8", "--lambda", "3,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["entries"][0]["wg"], "2*N^6/((N+1)*(N+2)*(N+6)*(N-1)*(N-2)*(N-3))");
    assert_eq!(v["entries"][0]["wg_limit"], "2");
    assert_eq!(v["metadata"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn wg_small_tables() {
    let v = json_of(&run(&["wg", "--n", "2"]));
    assert_eq!(v["entries"][0]["Wg"], "1/N");
    let v = json_of(&run(&["wg", "--n", "4", "--eval", "10"]));
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["lambda"], "[1,1]");
    assert_eq!(entries[0]["Wg_at_N"], "11/1080");
    assert_eq!(entries[1]["Wg_at_N"], "-1/1080");
}

#[test]
fn wg_rejects_wrong_weight() {
    assert_eq!(run(&["wg", "--n", "8", "--lambda", "2,1"]).status.code(), Some(2));
    assert_eq!(run(&["wg", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn moment_exact_and_float_agree() {
    let exact = json_of(&run(&["moment", "--expr", &data("two_point.json"), "--N", "3"]));
    assert_eq!(exact["moment_tr"], "5/54");
    assert_eq!(exact["moment_Tr"], "5/18");
    let float = json_of(&run(&["moment", "--expr", &data("two_point.json"), "--mode", "float"]));
    assert!((float["moment_tr"].as_f64().unwrap() - 5.0 / 54.0).abs() < 1e-12);
}

#[test]
fn moment_asymptotic_listing() {
    let v = json_of(&run(&["moment", "--expr", &data("ex_moment.json"), "--asymptotic"]));
    assert_eq!(v["limit"], Value::Array(vec![]));
    let v = json_of(&run(&["moment", "--expr", &data("two_point.json"), "--asymptotic"]));
    assert_eq!(v["limit"], Value::Array(vec![]));
    assert_eq!(v["limit_value"], "0");
    let v = json_of(&run(&["moment", "--expr", &data("conjugated.json"), "--asymptotic"]));
    assert_eq!(v["limit"][0]["coefficient"], "1");
    assert_eq!(v["limit"][0]["traces"], serde_json::json!(["tr(X1)", "tr(X2)"]));
    assert_eq!(v["limit_value"], "4/3");
}

#[test]
fn expand_lists_every_term() {
    let v = json_of(&run(&["expand", "--expr", &data("ex_moment.json")]));
    assert_eq!(v["term_count"], 11025);
    let hit = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .any(|t| t["chi"] == -1 && t["vertex_traces"] == serde_json::json!(["tr(X1 X3^T X5)", "tr(X2 X7 X8^T X4)", "tr(X6)"]));
    assert!(hit);
}

#[test]
fn cumulant_of_a_pair() {
    let v = json_of(&run(&["cumulant", "--exprs", &data("covariance.json"), "--N", "3"]));
    assert_eq!(v["order"], 2);
    let file: ExpressionFile = serde_json::from_str(&std::fs::read_to_string(data("covariance.json")).unwrap()).unwrap();
    let singles: Vec<TraceExpression> = file
        .traces
        .iter()
        .map(|t| TraceExpression::single(t.clone()).unwrap())
        .collect();
    let by_moments = cumulant_by_moments(&singles, &file.exact_matrices().unwrap(), 1_000_000).unwrap();
    assert_eq!(v["cumulant_Tr"], format_rational(&by_moments));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["moment", "--expr", &data("missing.json")]).status.code(), Some(1));
    assert_eq!(run(&["moment", "--expr", &data("bad_eps.json")]).status.code(), Some(2));
    assert_eq!(
        run(&["moment", "--expr", &data("two_point.json"), "--N", "4"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["--cap-terms", "10", "expand", "--expr", &data("ex_moment.json")]).status.code(),
        Some(3)
    );
    let pole = run(&["moment", "--expr", &data("ex_moment.json"), "--matrices", &data("eight_2x2.json")]);
    assert_eq!(pole.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&pole.stderr).contains("pole"));
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn verify_noncross_and_loops() {
    let out = run(&["verify", "--suite", "noncross,loops"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["passed"], true);
    for c in v["reports"][0]["checks"].as_array().unwrap() {
        assert_eq!(c["detail"]["counterexamples"], Value::Array(vec![]));
    }
}

#[test]
fn verify_output_is_independent_of_workers() {
    let args = |w: &'static str| {
        vec![
            "--workers", w, "verify", "--suite", "oracle,mc", "--battery", "12", "--samples", "2000", "--seed", "9",
        ]
    };
    let one = run(&args("1"));
    let four = run(&args("4"));
    assert_eq!(one.status.code(), four.status.code());
    assert_eq!(one.stdout, four.stdout);
    assert!(!one.stdout.is_empty());
}

#[test]
fn verify_mc_single_expression() {
    let out = run(&[
        "verify",
        "--suite",
        "mc",
        "--expr",
        &data("float_matrices.json"),
        "--N",
        "4",
        "--samples",
        "20000",
        "--seed",
        "42",
    ]);
    let v = json_of(&out);
    let r = &v["reports"][0];
    for key in ["exact", "mc_mean", "mc_se", "z_score"] {
        assert!(r[key].is_number(), "{key}");
    }
    assert_eq!(r["exact"], 0.375);
    assert_eq!(out.status.code(), Some(if r["passed"] == true { 0 } else { 5 }));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("orthowg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("wg.json");
    let out = run(&["--out", path.to_str().unwrap(), "wg", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["n"], 2);
    std::fs::remove_dir_all(dir).ok();
}

use std::path::PathBuf;
use std::process::Command;

use hypercusp::cli::run;
use hypercusp::formats::MvJson;
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["hypercusp"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hypercusp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn odd_k_is_a_usage_error() {
    let pts = scratch("odd.json", "[0.0, 0.0, 0.0, 1.0]");
    let (code, _, err) = call(&["eisenstein", "--at", pts.to_str().unwrap(), "--k", "3"]);
    assert_eq!(code, 2);
    assert!(err.contains("k must be even"), "{err}");
}

#[test]
fn eisenstein_convergence_guard() {
    let pts = scratch("guard.json", "[0.0, 0.0, 0.0, 1.0]");
    let (code, _, err) = call(&["eisenstein", "--at", pts.to_str().unwrap(), "--k", "0"]);
    assert_eq!(code, 2);
    assert!(err.contains("k < n-p-1"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let cfg = scratch("run.cfg", "# test run\nk = -4\nradius = 3\n");
    let pts = scratch("cfg-pts.json", "[[0.1, 0.2, 0.3, 1.5]]");
    let (code, out, _) =
        call(&["--config", cfg.to_str().unwrap(), "eisenstein", "--at", pts.to_str().unwrap(), "--radius", "4"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["k"], -4);
    assert_eq!(v["radius"], 4.0);
    assert!(v["values"][0]["tail_bound"].is_number() || v["values"][0]["tail_bound"] == "inf");
}

#[test]
fn csv_has_coordinate_coefficient_and_tail_columns() {
    let pts = scratch("csv.json", "[[0.1, 0.2, 1.5], [0.0, 0.0, 2.0]]");
    let (code, out, _) = call(&["eisenstein", "--n", "2", "--p", "1", "--radius", "4", "--at", pts.to_str().unwrap(), "--out", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x0,x1,x2,1,e1,e2,e1e2,tail_bound");
    assert_eq!(lines.len(), 3);
}

#[test]
fn cosets_export_as_records() {
    let (code, out, _) = call(&["group-enum", "--n", "2", "--p", "1", "--radius", "5"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let arr = v.as_array().unwrap();
    assert!(arr.len() > 1);
    for r in arr {
        let c = serde_json::from_value::<MvJson>(r["c"].clone()).unwrap().to_mv().unwrap();
        let d = serde_json::from_value::<MvJson>(r["d"].clone()).unwrap().to_mv().unwrap();
        assert!(c.norm_sqr() + d.norm_sqr() <= 25.0 + 1e-9);
        assert!(r["representative"]["a"].is_object());
    }
}

#[test]
fn kernel_verification_exit_codes() {
    let (code, out, _) = call(&["verify-kernel", "--function", "gk", "--k", "2"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 20);
    assert!(v[0]["est_error"].is_number());
    let (code, _, _) = call(&["verify-kernel", "--function", "x-en", "--k", "0"]);
    assert_eq!(code, 1);
    let (code, _, err) = call(&["verify-kernel", "--function", "nope"]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown function"));
}

#[test]
fn petersson_output_is_reproducible() {
    let args = ["petersson", "--n", "2", "--p", "1", "--radius", "4", "--f", "eisenstein", "--g", "poincare", "--samples", "640", "--allow-noncuspidal"];
    let a = call(&[&args[..], &["--seed", "5"]].concat());
    let b = call(&[&args[..], &["--seed", "5"]].concat());
    let c = call(&[&args[..], &["--seed", "6"]].concat());
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    assert_ne!(a.1, c.1);
    let v: Value = serde_json::from_str(&a.1).unwrap();
    assert_eq!(v["stderr"].as_array().unwrap().len(), 4);
    assert_eq!(v["domain"]["word_length"], 4);
}

#[test]
fn petersson_requires_a_cusp_form() {
    let (code, _, err) =
        call(&["petersson", "--n", "2", "--p", "1", "--radius", "4", "--f", "eisenstein", "--g", "poincare", "--samples", "640"]);
    assert_eq!(code, 1);
    assert!(err.contains("cusp coefficient test"), "{err}");
}

#[test]
fn quick_acceptance_subset() {
    let (code, out, _) = call(&["acceptance", "--quick", "--only", "12"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("criterion 12 PASS"), "{out}");
    assert_eq!(call(&["acceptance", "--only", "99"]).0, 2);
}

#[test]
fn binary_reports_usage_errors() {
    let bin = env!("CARGO_BIN_EXE_hypercusp");
    let st = Command::new(bin).arg("no-such-command").output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    let st = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let st = Command::new(bin).env("HYPERCUSP_THREADS", "zero").arg("--help").output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}

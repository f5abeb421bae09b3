use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn alglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alglab"))
        .args(args)
        .env_remove("ALGLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn with_json(args: &[&str]) -> (i32, Value, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut all = args.to_vec();
    let p = path.to_str().unwrap();
    all.extend(["--json", p, "--quiet"]);
    let out = alglab(&all);
    assert!(out.stdout.is_empty(), "--quiet printed to stdout");
    let raw = std::fs::read_to_string(&path).unwrap();
    (
        out.status.code().unwrap(),
        serde_json::from_str(&raw).unwrap(),
        raw,
    )
}

fn stage<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["stages"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == name)
        .unwrap_or_else(|| panic!("no stage {name}"))
}

#[test]
fn translations_report_two_verified_solutions() {
    let (code, r, _) = with_json(&["--builtin", "scaled_translations", "--param", "eps=0.6"]);
    assert_eq!(code, 0);
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["classification"]["class"], "two_solutions");
    let obj = r.as_object().unwrap();
    let mut keys: Vec<_> = obj.keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["classification", "exit_code", "instance", "stages"]);
    for s in r["stages"].as_array().unwrap() {
        for k in ["name", "status", "max_residual", "worst_point", "details"] {
            assert!(s.get(k).is_some(), "stage {} lacks {k}", s["name"]);
        }
    }
    let construction = &stage(&r, "construction")["details"]["samples"];
    for s in construction.as_array().unwrap() {
        assert!((s["psi_plus"][0][0].as_f64().unwrap() + 1.0 / 3.0).abs() < 1e-12);
        assert!((s["psi_minus"][0][0].as_f64().unwrap() + 3.0).abs() < 1e-12);
    }
    assert_eq!(stage(&r, "verification")["status"], "pass");
}

#[test]
fn failing_bound_exits_one_with_construction_skipped() {
    let (code, r, _) = with_json(&["--builtin", "so2_linear", "--param", "half_width=2"]);
    assert_eq!(code, 1);
    let ex = stage(&r, "existence");
    assert_eq!(ex["status"], "fail");
    assert!((ex["details"]["max_eig"].as_f64().unwrap() - 8.0).abs() < 1e-9);
    for name in ["construction", "verification", "uniqueness", "averaged"] {
        assert_eq!(stage(&r, name)["status"], "skipped", "{name}");
    }
    assert_eq!(stage(&r, "democratic")["status"], "pass");
    assert!(r["classification"].is_null());
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let (_, _, raw) = with_json(&["--builtin", "so3_euclidean", "--samples", "5"]);
    let floats: Vec<&str> = raw
        .split(|c: char| !(c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '+'))
        .filter(|t| t.contains('.') && t.contains('e'))
        .collect();
    assert!(floats.len() > 100);
    for f in floats {
        let mantissa = f.split('e').next().unwrap();
        let digits = mantissa.chars().filter(char::is_ascii_digit).count();
        assert_eq!(digits, 17, "{f}");
    }
}

#[test]
fn malformed_expression_exits_two() {
    let out = alglab(&["--input", data("malformed.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("syntax error") && err.contains("algebroid.anchor[1]"),
        "{err}"
    );
}

#[test]
fn invalid_input_exits_two() {
    let cases: &[&[&str]] = &[
        &["--builtin", "nope"],
        &["--builtin", "so2_linear", "--param", "half_width=-1"],
        &["--builtin", "so2_linear", "--param", "radius=1"],
        &["--builtin", "so2_linear", "--param", "half_width"],
        &["--builtin", "so2_linear", "--stages", "axioms,bogus"],
        &["--builtin", "so2_linear", "--tol", "-1"],
        &["--builtin", "so2_linear", "--samples", "0"],
        &["--input", "/nonexistent/instance.toml"],
        &["--samples", "3"],
        &["--input", "a.toml", "--builtin", "so2_linear"],
    ];
    for args in cases {
        assert_eq!(alglab(args).status.code(), Some(2), "{args:?}");
    }
    let out = Command::new(env!("CARGO_BIN_EXE_alglab"))
        .args(["--builtin", "identity_anchor"])
        .env("ALGLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn file_instances() {
    for (file, code) in [
        ("so3_rotations.toml", 0),
        ("curved_line.toml", 0),
        ("not_killing.toml", 1),
    ] {
        let (c, r, _) = with_json(&["--input", data(file).to_str().unwrap()]);
        assert_eq!(c, code, "{file}");
        assert_eq!(r["instance"]["source"], "file");
    }
    let (_, r, _) = with_json(&["--input", data("so3_rotations.toml").to_str().unwrap()]);
    assert_eq!(r["instance"]["random_samples"], 40);
    assert_eq!(r["instance"]["seed"], 11);
    assert_eq!(r["classification"]["class"], "unique");
    let (_, r, _) = with_json(&[
        "--input",
        data("so3_rotations.toml").to_str().unwrap(),
        "--samples",
        "7",
    ]);
    assert_eq!(r["instance"]["samples"], 9 + 7);
}

#[test]
fn axiom_failure_blocks_unless_forced() {
    let file = data("not_killing.toml");
    let (_, r, _) = with_json(&["--input", file.to_str().unwrap()]);
    assert_eq!(stage(&r, "axioms")["status"], "fail");
    assert_eq!(stage(&r, "existence")["status"], "skipped");
    let (code, r, _) = with_json(&["--input", file.to_str().unwrap(), "--force"]);
    assert_eq!(code, 1);
    assert_eq!(stage(&r, "existence")["status"], "pass");
}

#[test]
fn stage_list_and_summary() {
    let out = alglab(&[
        "--builtin",
        "identity_anchor",
        "--stages",
        "existence,uniqueness",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("boundary_saturated"), "{text}");
    assert!(
        text.contains("classification: unique (saturated)"),
        "{text}"
    );
    assert!(!text.contains("axioms"), "{text}");
}

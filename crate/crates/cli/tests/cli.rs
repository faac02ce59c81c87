use std::process::{Command, Output};

use serde_json::Value;

fn mcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

fn record<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == name)
        .unwrap_or_else(|| panic!("no record {name}"))
}

#[test]
fn certify_hm_trivial_and_unbounded() {
    let out = mcert(&["certify-hm", "--n", "3", "--family", "radial-power", "--param", "a=0", "--grid-levels", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(record(&report, "hm-constant")["measured"], 1.0);
    assert_eq!(report["verdict"], "PASS");

    let out = mcert(&["certify-hm", "--n", "3", "--family", "radial-power", "--param", "a=-1", "--grid-levels", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(record(&json(&out), "hm-order-0")["verdict"], "FAIL");
}

#[test]
fn certify_hm_fitted_decay() {
    let out = mcert(&["certify-hm", "--n", "3", "--family", "radial-power", "--param", "a=5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let fitted = record(&report, "decay-exponent")["measured"].as_f64().unwrap();
    assert!((fitted - 5.0).abs() <= 0.5, "fitted decay {fitted}");
    assert!(record(&report, "hm-constant")["measured"].as_f64().unwrap().is_finite());
}

#[test]
fn rigidity_examples() {
    let out = mcert(&["rigidity", "--n", "5", "--p", "10", "--family", "radial-power", "--param", "a=5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!((report["parameters"]["alpha0"].as_f64().unwrap() - 1.1).abs() < 1e-12);
    assert!((report["parameters"]["c"][1].as_f64().unwrap() - 5.0 / 3.0).abs() < 1e-12);

    let out = mcert(&["rigidity", "--n", "3", "--p", "10", "--family", "sine", "--param", "omega=1"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(record(&report, "limit-existence")["verdict"], "FAIL");
    assert_eq!(report["classification"], "VIOLATED");
}

#[test]
fn rigidity_with_schur_sections() {
    let out = mcert(&[
        "rigidity", "--n", "3", "--p", "100", "--family", "radial-power", "--param", "a=0", "--sizes", "4,8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["classification"], "CONSISTENT");
    let lb = record(&report, "schur-lower-bound-N8")["measured"].as_f64().unwrap();
    assert!((lb - 1.0).abs() < 1e-8);
}

#[test]
fn rigidity_with_point_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.csv");
    let mut text = String::from("g00,g01,g02,g10,g11,g12,g20,g21,g22\n");
    for s in [0.0, 0.5, 1.0, 1.5] {
        let (a, b) = (f64::exp(s), f64::exp(-s));
        text.push_str(&format!("{a},0,0,0,1,0,0,0,{b}\n"));
    }
    std::fs::write(&path, text).unwrap();
    let out = mcert(&[
        "rigidity", "--n", "3", "--p", "100", "--family", "radial-power", "--param", "a=0", "--points",
        path.to_str().unwrap(), "--sizes", "2,4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(report["records"].as_array().unwrap().iter().any(|r| r["name"] == "schur-lower-bound-N4"));
}

#[test]
fn sphere_spectrum_table_as_csv() {
    let out = mcert(&["sphere-spectrum", "--n", "3", "--p", "4", "--x", "0,0.5", "--kmax", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains('k'));
    assert!(lines.count() >= 4);
}

#[test]
fn schur_bound_of_all_ones_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("m.csv");
    std::fs::write(&input, "a,b,c\n1,1,1\n1,1,1\n1,1,1\n").unwrap();
    let report_path = dir.path().join("report.json");
    let out = mcert(&[
        "schur-bound", "--input", input.to_str().unwrap(), "--p", "inf", "--out", report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!((record(&report, "lower-bound")["measured"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn geometry_slope_for_sl2() {
    let out = mcert(&["geometry", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(record(&json(&out), "weyl-growth-slope")["verdict"], "PASS");
}

#[test]
fn input_errors_exit_with_two() {
    let out = mcert(&["certify-hm", "--n", "3", "--family", "no-such-family"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = mcert(&["schur-bound", "--input", "/nonexistent/m.csv", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    std::fs::write(&input, "a,b\n1,x\n2,3\n").unwrap();
    let out = mcert(&["schur-bound", "--input", input.to_str().unwrap(), "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn header_is_the_only_nondeterministic_part() {
    let args = ["rigidity", "--n", "4", "--p", "10", "--family", "hm-bump", "--sizes", "4,8", "--seed", "9"];
    let strip = |out: Output| {
        let mut v = json(&out);
        v.as_object_mut().unwrap().remove("header");
        v
    };
    assert_eq!(strip(mcert(&args)), strip(mcert(&args)));
}

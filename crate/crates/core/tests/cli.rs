//! End-to-end runs of the `degex` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn degex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degex")).args(args).env("DEGEX_THREADS", "2").output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn exit_codes_partition() {
    assert_eq!(degex(&["hilb", "count", "quartic"]).status.code(), Some(0));
    assert_eq!(degex(&["hilb", "count", "cube"]).status.code(), Some(3));
    assert_eq!(degex(&["label3", "quartic"]).status.code(), Some(1));
    let bad = degex(&["expand", "quartic"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(bad.stdout.is_empty());
}

#[test]
fn model_report_on_stdout() {
    let out = degex(&["model", "cube"]);
    let r = report(&out);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["results"]["f_vector"], serde_json::json!([6, 12, 8]));
    assert_eq!(r["results"]["metadata"]["resolved_singularities"], 24);
}

#[test]
fn identical_invocations_identical_bytes() {
    for args in [&["hilb", "count", "cube"][..], &["charts", "verify", "--n", "2", "--samples", "50", "--seed", "5"], &["certify-projectivity", "--all-edges"]] {
        assert_eq!(degex(args).stdout, degex(args).stdout, "{args:?}");
    }
}

#[test]
fn assignment_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corners.json");
    std::fs::write(
        &path,
        r#"{"triangles":[
            {"opposite":"Y4","first":"Y1","second":"Y2"},
            {"opposite":"Y3","first":"Y1","second":"Y2"},
            {"opposite":"Y2","first":"Y4","second":"Y3"},
            {"opposite":"Y1","first":"Y4","second":"Y3"}]}"#,
    )
    .unwrap();
    let arg = format!("@{}", path.display());
    let out = degex(&["expand", "quartic", "--n", "1", "--assignment", &arg]);
    assert_eq!(out.status.code(), Some(1));
    let failures = &report(&out)["results"]["gluing"]["failures"];
    assert!(failures.as_array().unwrap().iter().any(|f| f["edge"] == "Y2Y3"));
    assert_eq!(degex(&["expand", "quartic", "--n", "1", "--assignment", "@/nonexistent"]).status.code(), Some(2));
}

#[test]
fn export_json_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("pi.json");
    let out = degex(&["export", "pi-quartic", "--format", "json", "-o", json_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&json_path).unwrap();
    let back = degex::delta::DeltaComplex::from_json(&text).unwrap();
    assert_eq!(back.f_vector().0, vec![10, 45, 110, 120, 48]);
    assert_eq!(back.betti_numbers(), vec![1, 0, 1, 0, 1]);

    let dot_path = dir.path().join("cube.dot");
    assert_eq!(degex(&["export", "cube", "--format", "dot", "-o", dot_path.to_str().unwrap()]).status.code(), Some(0));
    assert!(std::fs::read_to_string(&dot_path).unwrap().starts_with("graph"));
}

#[test]
fn certify_with_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let mut certs = degex::projectivity::builtin_certificates();
    certs[0].pieces[2].b -= degex::exact::int(10);
    std::fs::write(&path, degex::projectivity::certificates_to_json(&certs)).unwrap();
    let out = degex(&["certify-projectivity", "--tau", "1/2", "--certificates", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["results"]["all_strictly_convex"], false);
}

#[test]
fn homology_command() {
    let r = report(&degex(&["hilb", "homology", "quartic"]));
    assert_eq!(r["results"]["betti"], serde_json::json!([1, 0, 1, 0, 1]));
    assert_eq!(r["results"]["cells"], 333);
    assert_eq!(r["results"]["boundary_squared_zero"], true);
}

use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betacode")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn schema() -> JSONSchema {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json")).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    JSONSchema::options().with_draft(jsonschema::Draft::Draft7).compile(&value).expect("schema compiles")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

#[test]
fn reports_validate_against_schema() {
    let schema = schema();
    let cases: &[&[&str]] = &[
        &["analyze", "x^2-2x-1"],
        &["analyze", "x^2+2x-1", "--samples", "40", "--inject-witness", "1"],
        &["analyze", "2x-3"],
        &["analyze", "x^3-x-1"],
        &["analyze", "x^2-4x+2"],
        &["expand", "1/2", "2x-1"],
        &["expand", "1/3", "x^2-x-1", "--depth", "12"],
        &["kernel", "x^2-x-1"],
        &["sample", "x^2-2x-1", "--samples", "60", "--window=-6,6"],
    ];
    for args in cases {
        let v = json(args);
        if let Err(errors) = schema.validate(&v) {
            let msgs: Vec<String> = errors.map(|e| format!("{e} at {}", e.instance_path)).collect();
            panic!("{args:?}: {msgs:?}");
        };
    }
}

#[test]
fn schema_rejects_malformed_report() {
    let schema = schema();
    let mut v = json(&["kernel", "x^2-x-1"]);
    v["kernel"]["sequences"] = Value::from(3);
    assert!(!schema.is_valid(&v));
    let mut v = json(&["expand", "1/2", "2x-1"]);
    v["command"] = Value::from("kernel");
    assert!(!schema.is_valid(&v));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["--json", "analyze", "x^2-2x-1", "--samples", "80", "--inject-witness", "2"][..],
        &["--json", "--threads", "3", "sample", "x^2-x-1", "--samples", "120", "--seed", "9"][..],
        &["analyze", "x^3-x-1"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_samples() {
    let one = json(&["sample", "x^2-x-1", "--samples", "150", "--seed", "4"]);
    let four = json(&["--threads", "4", "sample", "x^2-x-1", "--samples", "150", "--seed", "4"]);
    assert_eq!(one["sampling"], four["sampling"]);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["analyze", "x^2-x+1"]), 2);
    assert_eq!(code(&["kernel", "x^2-x+1"]), 2);
    assert_eq!(code(&["analyze", "x^2-1"]), 2);
    assert_eq!(code(&["analyze", "garbage"]), 1);
    assert_eq!(code(&["sample", "x^2-2x-1", "--window", "5,-5"]), 1);
    assert_eq!(code(&["sample", "x^2-2x-1", "--window", "abc"]), 1);
    assert_eq!(code(&["--precision", "8", "analyze", "x^2-2x-1"]), 1);
    assert_eq!(code(&["expand", "1/0", "2x-1"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["kernel", "2x-3"]), 2);
}

#[test]
fn expansions() {
    assert_eq!(json(&["expand", "1/2", "2x-1"])["digits"], ".1");
    assert_eq!(json(&["expand", "4/b", "x^2-2x-1"])["digits"], "1.111");
    let zero = json(&["expand", "0", "x^2-2x-1"]);
    assert_eq!(zero["digits"], "");
    assert_eq!(zero["terminated"], true);
    let third = json(&["expand", "1/3", "2x-1", "--depth", "8"]);
    assert_eq!(third["digits"], ".01010101");
    assert_eq!(third["terminated"], false);
    let text = run(&["expand", "1/2", "2x-1"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains(".1"));
}

#[test]
fn kernels() {
    let golden = json(&["kernel", "x^2-x-1"]);
    assert_eq!(golden["kernel"]["sequences"], serde_json::json!(["(0)^∞@0", "(01)^∞@0", "(01)^∞@1"]));
    let silver = json(&["kernel", "x^2-2x-1", "--max-period", "4"]);
    assert_eq!(silver["kernel"]["max_period"], 4);
    assert_eq!(silver["kernel"]["sequences"], serde_json::json!(["(0)^∞@0", "(02)^∞@0", "(02)^∞@1"]));
    let binary = json(&["kernel", "2x-1"]);
    assert_eq!(binary["kernel"]["sequences"], serde_json::json!(["(0)^∞@0", "(1)^∞@0"]));
}

#[test]
fn entropy_mismatch_is_flagged() {
    let v = json(&["analyze", "2x-3"]);
    assert_eq!(v["pisot"]["pisot"], false);
    assert_eq!(v["entropy"]["mismatch"], true);
    assert!(v["parry"].is_null());
    assert!(v["kernel"].is_null());
    let out = run(&["analyze", "2x-3"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("mismatch"));
    assert_eq!(json(&["analyze", "x^2-2x-1"])["entropy"]["mismatch"], false);
}

#[test]
fn silver_reciprocal_places() {
    let v = json(&["analyze", "x^2+2x-1"]);
    let places = v["places"].as_array().unwrap();
    let arch: Vec<&str> =
        places.iter().filter(|p| p["kind"] == "archimedean").map(|p| p["tag"].as_str().unwrap()).collect();
    assert_eq!(arch.len(), 2);
    assert!(arch.contains(&"stable") && arch.contains(&"unstable"));
    assert_eq!(v["pisot"]["side"], "reciprocal");
}

#[test]
fn injected_witness_is_kernel_explained() {
    let v = json(&["sample", "x^2-2x-1", "--samples", "200", "--inject-witness", "1"]);
    let s = &v["sampling"];
    assert_eq!(s["witnesses_injected"], 1);
    assert_eq!(s["witnesses_detected"], 1);
    assert_eq!(s["kernel_explained"], 1);
    assert_eq!(s["unexplained"], 0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("betacode.toml");
    std::fs::write(&path, "format = \"json\"\ndepth = 5\nseed = 7\nmax-period = 3\n").unwrap();
    let p = path.to_str().unwrap();
    let out = run(&["--config", p, "expand", "1/3", "2x-1"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["digits"], ".0101");
    assert_eq!(v["settings"]["seed"], 7);
    assert_eq!(v["settings"]["max_period"], 3);
    let out = run(&["--config", p, "--depth", "3", "expand", "1/3", "2x-1"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["digits"], ".01");
    let text = run(&["--config", p, "--text", "expand", "1/3", "2x-1"]);
    assert!(serde_json::from_slice::<Value>(&text.stdout).is_err());

    std::fs::write(&path, "colour = \"blue\"\n").unwrap();
    assert_eq!(code(&["--config", p, "kernel", "2x-1"]), 1);
}

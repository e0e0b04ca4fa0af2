//! The CLI against checked-in configs and golden outputs. Each builtin must give
//! the same bytes whether named with `--example` or loaded from its config file.

use std::path::PathBuf;
use std::process::{Command, Output};

use fedosov::builtin::BUILTIN_NAMES;
use fedosov::config::RunConfig;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fedosov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fedosov")).args(args).output().expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = fedosov(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn config_path(name: &str) -> String {
    manifest().join("configs").join(format!("{name}.json")).display().to_string()
}

fn golden(file: &str) -> String {
    std::fs::read_to_string(manifest().join("tests/golden").join(file)).unwrap()
}

#[test]
fn emitted_configs_match_checked_in_files() {
    for name in BUILTIN_NAMES {
        let emitted = stdout_ok(&["emit-config", "--example", name]);
        assert_eq!(emitted, std::fs::read_to_string(config_path(name)).unwrap(), "{name}");
        let parsed = RunConfig::from_json(&emitted).unwrap();
        assert_eq!(parsed.to_json().unwrap(), emitted, "{name} round trip");
    }
}

#[test]
fn class_output_matches_golden_on_both_paths() {
    for name in BUILTIN_NAMES {
        let by_config = stdout_ok(&["class", "--config", &config_path(name)]);
        let by_name = stdout_ok(&["class", "--example", name]);
        assert_eq!(by_config, by_name, "{name}");
        assert_eq!(by_config, golden(&format!("{name}.class.json")), "{name}");
    }
}

#[test]
fn star_output_matches_golden_on_both_paths() {
    for name in BUILTIN_NAMES {
        let by_config = stdout_ok(&["star", "--config", &config_path(name), "--order", "2"]);
        let by_name = stdout_ok(&["star", "--example", name, "--order", "2"]);
        assert_eq!(by_config, by_name, "{name}");
        assert_eq!(by_config, golden(&format!("{name}.star.json")), "{name}");
    }
}

#[test]
fn order_zero_table_is_pointwise_product() {
    let v: serde_json::Value = serde_json::from_str(&stdout_ok(&["star", "--example", "moyal_r2", "--order", "0"])).unwrap();
    let table = v["table"].as_array().unwrap();
    assert_eq!(table.len(), 1);
    let terms = table[0]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["left"], serde_json::json!([0, 0]));
    assert_eq!(terms[0]["right"], serde_json::json!([0, 0]));
    assert_eq!(terms[0]["coeff"], serde_json::json!([["1/1", [0, 0]]]));
}

#[test]
fn dk0_suite_on_the_plane() {
    let out = fedosov(&["verify", "--example", "moyal_r2", "--suite", "dk0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let dk0 = &v["checks"][0];
    assert_eq!(dk0["check"], "dk0_identity");
    // i dq∧dp at ħ⁰ and nothing else
    assert_eq!(dk0["details"]["dk0"], serde_json::json!([{ "hbar_order": 0, "dx": [0, 1], "poly": [["0/1+1/1*i", [0, 0]]] }]));
}

#[test]
fn liouville_suite_fails_for_squared_perturbation() {
    let out = fedosov(&["verify", "--example", "torus_h2_omega1", "--suite", "liouville"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = v["checks"].as_array().unwrap();
    let by_name = |n: &str| checks.iter().find(|c| c["check"] == n).unwrap();
    assert_eq!(by_name("liouville_obstruction")["passed"], false);
    assert_eq!(by_name("liouville_existence")["passed"], false);
}

#[test]
fn bad_input_is_an_error() {
    assert_eq!(fedosov(&["star", "--example", "sphere"]).status.code(), Some(2));
    let dir = std::env::temp_dir().join(format!("fedosov-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\n  \"example\": \"moyal_r2\",\n  \"order\": x\n}").unwrap();
    let out = fedosov(&["star", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3, column 12"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("fedosov-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("class.json");
    let out = fedosov(&["class", "--example", "moyal_r2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), golden("moyal_r2.class.json"));
    std::fs::remove_dir_all(&dir).ok();
}

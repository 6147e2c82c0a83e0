use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn g2lyap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_g2lyap"))
        .args(args)
        .env("G2LYAP_OUTPUT_DIR", out)
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_subcommand_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = g2lyap(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frobnicate"));
}

#[test]
fn malformed_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = g2lyap(&["estimate", "--dataset", "g2-elliptic-surface", "--steps", "many"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(g2lyap(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn formula_writes_sum_to_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = g2lyap(&["formula", "--genus", "0", "--punctures", "4", "--degree", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json = read_json(&dir.path().join("formula.json"));
    assert_eq!(json["sum"], "1");
    assert!(json["timestamp"].is_u64());
}

#[test]
fn verify_g2() {
    let dir = tempfile::tempdir().unwrap();
    let out = g2lyap(&["verify", "--dataset", "g2-elliptic-surface"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json = read_json(&dir.path().join("verify.json"));
    let report = &json["report"];
    assert_eq!(report["symmetric_form_dimension"], 1);
    assert_eq!(report["trilinear_form_dimension"], 1);
    assert_eq!(report["signature"]["positive"], 4);
    assert_eq!(report["signature"]["negative"], 3);
    assert!(dir.path().join("verify.csv").exists());
}

#[test]
fn predict_and_recover() {
    let dir = tempfile::tempdir().unwrap();
    let out = g2lyap(&["predict", "--gamma", "2,1,-3", "--rep", "standard"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json = read_json(&dir.path().join("predict.json"));
    assert_eq!(json["spectrum"], serde_json::json!(["5", "4", "1", "0", "-1", "-4", "-5"]));
    let out = g2lyap(&["recover", "--exponents", "5,4,1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(&dir.path().join("recover.json"))["gamma"], serde_json::json!(["2", "1", "-3"]));
    let out = g2lyap(&["recover", "--exponents", "5,4,2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_overrides_env() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let out = g2lyap(&["datasets", "--out", flag_dir.path().to_str().unwrap()], env_dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(flag_dir.path().join("datasets.json").exists());
    assert!(!env_dir.path().join("datasets.json").exists());
}

#[test]
fn weight_one_calibrated_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let out = g2lyap(
        &["estimate", "--dataset", "sl2-sanity", "--steps", "100000", "--seed", "11"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let estimate = dir.path().join("estimate.json");
    let json = read_json(&estimate);
    assert_eq!(json["checksum"], g2_lyapunov::monodromy_dataset::BuiltinDataset::Sl2Sanity.expected_checksum());
    let top = json["exponents"][0].as_f64().unwrap();

    // 2·(1/2) / (2·0 − 2 + 3) = 1, so the calibrated scale is 1/λ̂₁.
    let profile = dir.path().join("profile.json");
    std::fs::write(
        &profile,
        r#"{"weight":1,"hodge_numbers":[1,1],"genus":0,"punctures":3,"degrees":{"H^{1,0}":"1/2"}}"#,
    )
    .unwrap();
    let scale = format!("{:?}", 1.0 / top);
    let args = ["formula", "--profile", profile.to_str().unwrap(), "--k", "1", "--estimate", estimate.to_str().unwrap(), "--scale"];
    let mut good = args.to_vec();
    good.push(&scale);
    let out = g2lyap(&good, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let json = read_json(&dir.path().join("formula.json"));
    assert_eq!(json["prediction"]["branch"], "full-F");
    assert_eq!(json["comparison"]["consistent"], true);

    let wrong = format!("{:?}", 2.0 / top);
    let mut bad = args.to_vec();
    bad.push(&wrong);
    let out = g2lyap(&bad, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(read_json(&dir.path().join("formula.json"))["comparison"]["consistent"], false);
}

#[test]
fn symbolic_g2_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("g2.json");
    std::fs::write(&profile, r#"{"weight":2,"hodge_numbers":[2,3,2],"genus":0,"punctures":4}"#).unwrap();
    let out = g2lyap(&["formula", "--profile", profile.to_str().unwrap(), "--k", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json = read_json(&dir.path().join("formula.json"));
    assert_eq!(json["prediction"]["branch"], "truncated-H^{n,0}");
    assert_eq!(json["prediction"]["predicted_sum"], "2*deg(H^{2,0})/2");
    assert_eq!(json["shape_pattern"], "+++0---");
}

#[test]
fn config_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "dataset = \"sl2-sanity\"\nsteps = 100000\nblocks = 10\nseed = 5\n").unwrap();
    let out = g2lyap(&["estimate", "--config", cfg.to_str().unwrap(), "--steps", "5000"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json = read_json(&dir.path().join("estimate.json"));
    assert_eq!(json["config"]["walk"]["steps"], 5000);
    assert_eq!(json["config"]["walk"]["master_seed"], 5);
    assert_eq!(json["config"]["walk"]["blocks"], 10);
}

//! End-to-end tests driving the compiled `dynmds` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dynmds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynmds"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("stdout is JSON")
}

fn write_matrix(dir: &Path, name: &str, matrix: &dynmds::Matrix) -> String {
    let path = dir.join(name);
    fs::write(&path, matrix.to_string()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn aes_file(dir: &Path) -> String {
    write_matrix(dir, "aes.txt", &dynmds::fixtures::aes_circulant())
}

#[test]
fn verify_reports_mds_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dynmds(&["verify", &aes_file(dir.path())]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("is_mds: true"));
    assert!(text.contains("minors_checked: 69"));
}

#[test]
fn verify_non_mds_exits_one_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let id = dynmds::Matrix::identity(dynmds::FieldSpec::aes(), 4).unwrap();
    let path = write_matrix(dir.path(), "id.txt", &id);
    let out = dynmds(&["verify", &path]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("is_mds: false"));
    assert!(text.contains("witness_rows: [0]"));
    assert!(text.contains("witness_cols: [1]"));
}

#[test]
fn verify_json_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dynmds(&["verify", "--json", &aes_file(dir.path())]);
    let v = stdout_json(&out);
    assert_eq!(v["is_mds"], true);
    assert_eq!(v["minors_checked"], 69);
    assert!(v["witness_rows"].is_null());
}

#[test]
fn derive_output_is_a_loadable_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = dynmds(&["derive", "--constant", "0x02", &aes_file(dir.path())]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("04 06 02 02"), "derived text: {text}");

    let derived_path = dir.path().join("derived.txt");
    fs::write(&derived_path, &text).unwrap();
    let again = dynmds(&["verify", derived_path.to_str().unwrap()]);
    assert!(again.status.success());
}

#[test]
fn derive_from_secret_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = aes_file(dir.path());
    let a = dynmds(&["derive", "--secret", "handshake output", &path]);
    let b = dynmds(&["derive", "--secret", "handshake output", &path]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));

    let c = dynmds(&["derive", "--secret", "different secret", &path]);
    assert_ne!(stdout(&a), stdout(&c));
}

#[test]
fn derive_rejects_the_zero_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dynmds(&["derive", "--constant", "0", &aes_file(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ZeroConstant"));
}

#[test]
fn derive_requires_exactly_one_constant_source() {
    let dir = tempfile::tempdir().unwrap();
    let path = aes_file(dir.path());
    let both = dynmds(&["derive", "--constant", "2", "--secret", "x", &path]);
    assert_eq!(both.status.code(), Some(2));
    let neither = dynmds(&["derive", &path]);
    assert_eq!(neither.status.code(), Some(2));
}

#[test]
fn normalize_maps_the_pivot_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "optimal.txt", &dynmds::fixtures::optimal_fixture());
    let out = dynmds(&["normalize", "--pivot", "0x02", &path]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let norm_path = dir.path().join("normalized.txt");
    fs::write(&norm_path, stdout(&out)).unwrap();
    let m = dynmds(&["metrics", "--json", norm_path.to_str().unwrap()]);
    let v = stdout_json(&m);
    assert_eq!(v["ones_count"], 4);
}

#[test]
fn classify_names_the_builtin_circulant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dynmds(&["classify", &aes_file(dir.path())]);
    assert_eq!(stdout(&out), "circulant\n");
}

#[test]
fn metrics_json_includes_the_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = dynmds(&["metrics", "--json", &aes_file(dir.path())]);
    let v = stdout_json(&out);
    assert_eq!(v["ones_count"], 8);
    assert_eq!(v["distinct_constants"], 2);
    assert_eq!(v["biregular"], true);
    assert_eq!(v["class"], "circulant");
}

#[test]
fn metrics_reports_null_class_for_non_mds_input() {
    let dir = tempfile::tempdir().unwrap();
    let id = dynmds::Matrix::identity(dynmds::FieldSpec::aes(), 4).unwrap();
    let path = write_matrix(dir.path(), "id.txt", &id);
    let out = dynmds(&["metrics", "--json", &path]);
    assert!(out.status.success());
    assert!(stdout_json(&out)["class"].is_null());
}

#[test]
fn cost_prices_the_builtin_circulant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dynmds(&["cost", "--json", &aes_file(dir.path())]);
    let v = stdout_json(&out);
    // 8 non-one entries backed by 2 tables: 2*16 + 6*2 = 44 cycles,
    // (2 + 2) * 256 bytes of tables.
    assert_eq!(v["tables"], 2);
    assert_eq!(v["cycle_proxy"], 44);
    assert_eq!(v["memory_units"], 1024);
    assert_eq!(v["class"], "circulant");
}

#[test]
fn cost_honors_parameter_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dynmds(&[
        "cost",
        "--json",
        "--cost-mul",
        "10",
        "--cost-lookup",
        "1",
        "--overhead-tables",
        "0",
        &aes_file(dir.path()),
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["cycle_proxy"], 26); // 2*10 + 6*1
    assert_eq!(v["memory_units"], 512); // 2 * 256
}

#[test]
fn rank_orders_the_builtin_fixtures() {
    let out = dynmds(&["rank"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("Type of matrix"));
    assert!(lines[1].starts_with("optimal"));
    assert!(lines[5].starts_with("worst-case"));

    let v = stdout_json(&dynmds(&["rank", "--json"]));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let cycles: Vec<u64> = rows.iter().map(|r| r["cycle_proxy"].as_u64().unwrap()).collect();
    assert!(cycles.windows(2).all(|w| w[0] <= w[1]), "{cycles:?}");
    assert_eq!(cycles, vec![42, 66, 66, 192, 256]);
}

#[test]
fn find_optimal_reports_the_frozen_instance() {
    let out = dynmds(&["find-optimal"]);
    let text = stdout(&out);
    assert!(text.contains("a = 0x02"));
    assert!(text.contains("b = 0x05"));
    assert!(text.contains("02 01 01 01"));
}

#[test]
fn demo_round_trip_via_flags() {
    let pt = "00112233445566778899aabbccddeeff";
    let enc = dynmds(&["demo-encrypt", "--secret", "handshake", pt]);
    assert!(enc.status.success(), "stderr: {}", stderr(&enc));
    let ct = stdout(&enc).trim().to_owned();
    assert_ne!(ct, pt);
    let dec = dynmds(&["demo-decrypt", "--secret", "handshake", &ct]);
    assert_eq!(stdout(&dec).trim(), pt);
}

#[test]
fn demo_round_trip_via_session_file() {
    let dir = tempfile::tempdir().unwrap();
    write_matrix(dir.path(), "seed.txt", &dynmds::fixtures::aes_circulant());
    let session_path = dir.path().join("session.conf");
    fs::write(
        &session_path,
        "# demo session\nsecret-hex = deadbeefcafe\nseed-matrix-file = seed.txt\nrounds = 6\nmode = round\n",
    )
    .unwrap();
    let session = session_path.to_str().unwrap();

    let pt = "546173746520746865207261696e626f";
    let enc = dynmds(&["demo-encrypt", "--session", session, pt]);
    assert!(enc.status.success(), "stderr: {}", stderr(&enc));
    let ct = stdout(&enc).trim().to_owned();
    let dec = dynmds(&["demo-decrypt", "--session", session, &ct]);
    assert_eq!(stdout(&dec).trim(), pt);

    // A flag overrides the file: different rounds, different ciphertext.
    let enc8 = dynmds(&["demo-encrypt", "--session", session, "--rounds", "8", pt]);
    assert_ne!(stdout(&enc8).trim(), ct);
}

#[test]
fn avalanche_json_reports_mean_and_control() {
    let out = dynmds(&[
        "avalanche",
        "--json",
        "--secret",
        "avalanche demo",
        "--trials",
        "300",
        "--control",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["trials"], 300);
    assert_eq!(v["per_round"].as_array().unwrap().len(), 8);
    let mean = v["mean"].as_f64().unwrap();
    assert!((0.40..=0.60).contains(&mean), "mean {mean}");
    let control_mean = v["control_mean"].as_f64().unwrap();
    assert!(control_mean < mean, "control {control_mean} vs mds {mean}");
}

#[test]
fn selftest_passes() {
    let out = dynmds(&["selftest"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("all checks passed"));

    let v = stdout_json(&dynmds(&["selftest", "--json"]));
    assert_eq!(v["ok"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 8);
}

#[test]
fn errors_use_exit_one_and_usage_uses_exit_two() {
    let missing = dynmds(&["verify", "/no/such/file.txt"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("cannot read"));

    let enc = dynmds(&["demo-encrypt", "--secret", "s", "deadbeef"]);
    assert_eq!(enc.status.code(), Some(1));
    assert!(stderr(&enc).contains("32 hex characters"));

    let usage = dynmds(&["no-such-subcommand"]);
    assert_eq!(usage.status.code(), Some(2));
}

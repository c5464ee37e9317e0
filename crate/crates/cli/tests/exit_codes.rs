mod common;

use std::path::Path;

use common::run;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

#[test]
fn empty_point_file_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "e.csv", "");
    let out = dir.path().join("out");
    assert_eq!(
        code(&["extremal", "--input", &input, "--out-dir", out.to_str().unwrap()]),
        2
    );
}

#[test]
fn malformed_row_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "e.csv", "re,im\n0.1,zz\n");
    let out = dir.path().join("out");
    let output = run(&["diagnose", "--input", &input, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("line 2"));
}

#[test]
fn unknown_config_key_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "re,im\n0,0\n");
    let config = write(dir.path(), "c.json", r#"{"schema_version":1,"radius_typo":0.5}"#);
    let out = dir.path().join("out");
    assert_eq!(
        code(&[
            "extremal", "--input", &input, "--config", &config, "--out-dir",
            out.to_str().unwrap()
        ]),
        2
    );
}

#[test]
fn exhaustive_over_budget_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (1..=30)
        .map(|j| format!("{},{}\n", 0.02 * j as f64, 0.0))
        .collect();
    let input = write(dir.path(), "p.csv", &format!("re,im\n{rows}"));
    let config = write(
        dir.path(),
        "c.json",
        r#"{"extremal":{"n_max":10,"budget":1000,"method":"exhaustive"}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(
        code(&[
            "extremal", "--input", &input, "--config", &config, "--out-dir",
            out.to_str().unwrap()
        ]),
        3
    );
}

#[test]
fn radius_outside_range_is_range_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "re,im\n0,0\n");
    let config = write(dir.path(), "c.json", r#"{"radius":0.9999,"eps_list":[0.1]}"#);
    let out = dir.path().join("out");
    assert_eq!(
        code(&[
            "stability", "--input", &input, "--config", &config, "--out-dir",
            out.to_str().unwrap()
        ]),
        4
    );
}

#[test]
fn recover_without_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "re,im\n0,0\n");
    let out = dir.path().join("out");
    let c = code(&["recover", "--input", &input, "--out-dir", out.to_str().unwrap()]);
    assert!(c == 2 || c == 4, "exit {c}");
}

#[test]
fn zero_threads_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "re,im\n0,0\n");
    assert_eq!(code(&["diagnose", "--input", &input, "--threads", "0"]), 2);
}

#[test]
fn missing_input_flag_is_usage_error() {
    assert_eq!(code(&["extremal"]), 2);
}

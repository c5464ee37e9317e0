#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hardy")
}

pub fn golden_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Case directories; the subcommand is the name up to the first `_`.
pub fn golden_cases() -> Vec<PathBuf> {
    let mut cases: Vec<PathBuf> = std::fs::read_dir(golden_root())
        .expect("golden directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.join("input.csv").exists())
        .collect();
    cases.sort();
    cases
}

pub fn subcommand(case: &Path) -> String {
    let name = case.file_name().unwrap().to_string_lossy();
    name.split('_').next().unwrap().to_string()
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn hardy")
}

/// Runs a golden case into `out` and returns its files by name.
pub fn run_case(case: &Path, out: &Path, threads: Option<usize>) -> BTreeMap<String, Vec<u8>> {
    let cmd = subcommand(case);
    let input = case.join("input.csv");
    let config = case.join("config.json");
    let mut args = vec![
        cmd.clone(),
        "--input".into(),
        input.to_string_lossy().into_owned(),
        "--config".into(),
        config.to_string_lossy().into_owned(),
        "--out-dir".into(),
        out.to_string_lossy().into_owned(),
    ];
    if let Some(t) = threads {
        args.push("--threads".into());
        args.push(t.to_string());
    }
    let arg_refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let output = run(&arg_refs);
    assert!(
        output.status.success(),
        "{} failed: {}",
        case.display(),
        String::from_utf8_lossy(&output.stderr)
    );
    read_dir_files(out)
}

pub fn read_dir_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("output directory") {
        let path = entry.expect("entry").path();
        if path.is_file() {
            files.insert(
                path.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&path).expect("read output"),
            );
        }
    }
    files
}

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn imcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imcc"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Runs and requires exit 0, returning stdout.
pub fn ok(args: &[&str]) -> String {
    let out = imcc(args);
    assert_eq!(code(&out), 0, "imcc {args:?} failed: {}", stderr(&out));
    stdout(&out)
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Synthetic CSV in `dir`; extra flags go to `gen-synthetic`.
pub fn synthetic(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["gen-synthetic", "--out", path_str(&path)];
    args.extend_from_slice(extra);
    ok(&args);
    path
}

pub fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn assert_valid(schema_name: &str, instance: &Value) {
    let validator = jsonschema::validator_for(&schema(schema_name)).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}\n{instance}");
}

/// Predictions CSV body: header, then q scores and q signs per row.
pub fn predictions_csv(scores: &[Vec<f64>], signs: &[Vec<i8>]) -> String {
    let q = scores[0].len();
    let mut out: Vec<String> = (0..q).map(|j| format!("score_{j}")).collect();
    out.extend((0..q).map(|j| format!("sign_{j}")));
    let mut text = out.join(",") + "\n";
    for (s, p) in scores.iter().zip(signs) {
        let cells: Vec<String> = s.iter().map(|v| v.to_string()).chain(p.iter().map(|v| v.to_string())).collect();
        text += &(cells.join(",") + "\n");
    }
    text
}

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

use serde_json::{json, Value};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_quasilevel")
}

pub fn square_spec(a: f64, b: f64) -> Value {
    json!({
        "kind": "explicit",
        "dim_n": 2,
        "terms": [
            {"freq": [1, 0], "amp": a, "phase": 0.0},
            {"freq": [0, 1], "amp": b, "phase": 0.0}
        ],
        "frame_u": [1.0, 0.0],
        "frame_v": [0.0, 1.0],
        "offset": [0.0, 0.0]
    })
}

pub fn star_spec(n: usize) -> Value {
    json!({"kind": "star", "n": n, "amps": [1.0]})
}

pub fn config(potential: Value, command: &str, parameters: Value) -> Value {
    json!({"potential": potential, "command": command, "parameters": parameters, "seed": 11})
}

/// Writes `cfg` next to `out` and runs the matching subcommand.
pub fn run_cli(cfg: &Value, out: &Path, extra: &[&str]) -> Output {
    std::fs::create_dir_all(out).unwrap();
    let path = out.with_extension("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    let command = cfg["command"].as_str().unwrap();
    std::process::Command::new(bin())
        .arg(command)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

/// Runs and insists on success.
pub fn run_ok(cfg: &Value, out: &Path, extra: &[&str]) -> PathBuf {
    let o = run_cli(cfg, out, extra);
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    out.to_path_buf()
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn error_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("error JSON on stderr");
    serde_json::from_str(line).unwrap()
}

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn codemapper(dir: &Path, args: &[&str]) -> Run {
    let Output {
        status,
        stdout,
        stderr,
    } = Command::new(env!("CARGO_BIN_EXE_codemapper"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: status.code().expect("exited normally"),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

/// A temp directory after `init --demo`: store, snippet corpus and the
/// sorting pipeline graph.
pub fn demo_dir() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let run = codemapper(dir.path(), &["init", "--demo", "--store", "demo.cmdb.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let store = dir.path().join("demo.cmdb.json");
    (dir, store)
}

pub const GRAPH: &str = "sort-pipeline.cmap.json";

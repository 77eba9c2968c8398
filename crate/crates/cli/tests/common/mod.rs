#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn score(args: &[&str]) -> Output {
    score_env(args, &[])
}

pub fn score_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_score"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

/// Runs `score` and panics with its stderr unless it exits 0.
pub fn ok(args: &[&str]) -> String {
    let out = score(args);
    assert!(
        out.status.success(),
        "score {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn code(args: &[&str]) -> i32 {
    score(args).status.code().expect("exit code")
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

pub fn kv(path: &Path) -> Vec<(String, String)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

pub fn kv_get(path: &Path, key: &str) -> String {
    kv(path)
        .into_iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("{key} missing from {}", path.display()))
        .1
}

/// Synthetic task in `dir` with the given extra flags.
pub fn synth(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.join("task");
    let mut args = vec!["synth", "--out-dir", p(&out)];
    args.extend_from_slice(extra);
    ok(&args);
    out
}

pub const ANIMALS: &str = "\
animal
\taquatic
\t\tdolphin = dolphin
\t\twhale = whale
\tterrestrial
\t\tbear = bear
\t\thorse = horse
\taerial
\t\teagle = eagle
\t\tbat = bat
";

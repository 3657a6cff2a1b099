//! Helpers for driving the `conga` binary in tests.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

pub fn conga(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conga"))
        .args(args)
        .output()
        .expect("run conga binary")
}

pub fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process exited with a code")
}

pub fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

pub fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

/// Collapses runs of whitespace so aligned-table assertions stay robust.
pub fn normalized(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

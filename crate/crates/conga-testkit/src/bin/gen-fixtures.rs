//! Regenerates the committed corpora under `fixtures/`.
//!
//! Usage: `cargo run -p conga-testkit --bin gen-fixtures [-- <out dir>]`
//! (default out dir: `fixtures`). Output is deterministic, so a regeneration
//! over an unchanged builder produces byte-identical files.

use std::path::PathBuf;

use conga_testkit::synth;

fn main() {
    let out_dir: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fixtures".to_string())
        .into();
    std::fs::create_dir_all(&out_dir).expect("create fixtures directory");
    for (name, bytes) in synth::fixture_files() {
        let path = out_dir.join(name);
        std::fs::write(&path, bytes).expect("write fixture");
        println!("wrote {}", path.display());
    }
}

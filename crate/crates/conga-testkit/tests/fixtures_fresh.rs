//! Guards the committed fixtures against drifting from their builders:
//! regenerating must be a no-op.

use std::path::Path;

#[test]
fn committed_fixtures_match_builders() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for (name, expected) in conga_testkit::synth::fixture_files() {
        let committed = std::fs::read(dir.join(name))
            .unwrap_or_else(|e| panic!("{name} unreadable ({e}); run gen-fixtures"));
        assert_eq!(
            committed, expected,
            "{name} is stale; regenerate with `cargo run -p conga-testkit --bin gen-fixtures`"
        );
    }
}

//! Test support shared across the workspace: proptest generators for tagged
//! text and corpora, an independent brute-force reimplementation of the
//! classifier used as a test oracle, deterministic synthetic fixtures, and a
//! minimal in-process HTTP server that plays the translation provider.
//!
//! Nothing in here ships in release artifacts; the crate exists so the unit
//! suites, the acceptance suite and the benchmarks draw from one set of
//! generators instead of three drifting copies.

pub mod http;
pub mod oracle;
pub mod strategies;
pub mod synth;
pub mod transforms;

//! Entity-level gender evaluation for machine translation output.
//!
//! The crate covers the full pipeline from annotated text to comparative
//! reports:
//!
//! - [`tag`] — the inline tag grammar (`<M1>`, `<F2>`, `<A3>`) and the
//!   parser/serializer for tagged sentences;
//! - [`corpus`] — bilingual corpus records and the JSONL/TSV on-disk formats;
//! - [`validate`] — annotation-guideline linting with coded diagnostics;
//! - [`eval`] — alignment of source entities with target realisations and
//!   classification into match / error / bias / unmatched outcomes;
//! - [`metrics`] — per-gender precision/recall/F1 and ambiguity-resolution
//!   statistics;
//! - [`report`] — outcome CSVs, per-sentence logs and summary emission;
//! - [`provider`] — an HTTP client for producing candidate translations from
//!   an external model server.
//!
//! Everything is deterministic: identical inputs produce byte-identical
//! serialized outputs, and per-record work is pure so callers may shard it
//! across threads freely.

pub mod corpus;
pub mod eval;
pub mod metrics;
pub mod provider;
pub mod report;
pub mod tag;
pub mod validate;

pub use corpus::{Corpus, CorpusFormat, CorpusRecord, LoadError, SaveError, Side};
pub use eval::{classify_corpus, classify_record, EvalError, Outcome, OutcomeKind};
pub use metrics::{
    aggregate, f1, tag_distribution, AmbiguityStats, GenderCounts, GenderMetrics, MetricFlag,
    Ratio, TagDistribution,
};
pub use report::{
    build_report, compare_systems, corpus_digest, emit_distribution_table, emit_outcome_csv,
    emit_sentence_log, emit_summary, EvaluationReport, MetricDelta, ReportError, SentenceLogRow,
    SummaryFormat, SystemReport,
};
pub use tag::{
    parse_tagged, serialize_tagged, EntityIndex, GenderClass, GenderTag, ParseTagError,
    RealizedGender, TaggedSentence, TaggedToken, TokenError,
};
pub use validate::{validate, Diagnostic, RuleCode, Severity};

/// Version string embedded in reports and manifests.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

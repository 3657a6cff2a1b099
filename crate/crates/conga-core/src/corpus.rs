//! Corpus records and the two on-disk corpus formats.
//!
//! The canonical format is JSONL, one record per line:
//!
//! ```json
//! {"id":"110","source":"... we <F1> ...","targets":{"tower":"... reattive <F1> ..."}}
//! ```
//!
//! Keys are always emitted in the order `id`, `source`, `targets` and the
//! target map keeps insertion order, so saving is byte-stable. TSV is a
//! convenience format for the single-system case: `id<TAB>source<TAB>target`
//! with the system implicitly named `default`.
//!
//! Loading is all-or-nothing: every defect found (up to a cap of 100) is
//! reported with its line number and the load fails as a whole.

use std::fmt;

use indexmap::IndexMap;
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::tag::{parse_tagged, serialize_tagged, ParseTagError, TaggedSentence};

/// Which sentence of a record a diagnostic or count refers to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Source,
    Target(String),
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Source => f.write_str("source"),
            Side::Target(system) => write!(f, "target({system})"),
        }
    }
}

/// One sentence pair: an annotated source and any number of annotated
/// system outputs keyed by system name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub id: String,
    pub source: TaggedSentence,
    pub targets: IndexMap<String, TaggedSentence>,
}

/// An ordered sequence of records with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub records: Vec<CorpusRecord>,
}

impl Corpus {
    pub fn new(records: Vec<CorpusRecord>) -> Self {
        Corpus { records }
    }

    /// System names in order of first appearance across the records.
    pub fn systems(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for record in &self.records {
            for name in record.targets.keys() {
                if !seen.contains(&name.as_str()) {
                    seen.push(name);
                }
            }
        }
        seen
    }

    pub fn load(text: &str, format: CorpusFormat) -> Result<Self, LoadError> {
        match format {
            CorpusFormat::Jsonl => load_jsonl(text),
            CorpusFormat::Tsv => load_tsv(text),
        }
    }

    pub fn save(&self, format: CorpusFormat) -> Result<Vec<u8>, SaveError> {
        match format {
            CorpusFormat::Jsonl => Ok(save_jsonl(self)),
            CorpusFormat::Tsv => save_tsv(self),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Tsv,
}

impl CorpusFormat {
    /// Picks the format from a file extension; `.tsv` means TSV, anything
    /// else is treated as the canonical JSONL.
    pub fn from_extension(path: &str) -> CorpusFormat {
        match path.rsplit('.').next() {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => CorpusFormat::Tsv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Jsonl => "jsonl",
            CorpusFormat::Tsv => "tsv",
        })
    }
}

/// Cap on collected line errors before a load gives up scanning.
const MAX_REPORTED_ERRORS: usize = 100;

/// A defect tied to one input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    /// 1-based line number in the input.
    pub line: usize,
    pub kind: LineErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineErrorKind {
    DuplicateId { id: String, first_line: usize },
    Tag { field: String, error: ParseTagError },
    Schema { detail: String },
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LineErrorKind::DuplicateId { id, first_line } => write!(
                f,
                "line {}: duplicate record id {:?} (first used on line {})",
                self.line, id, first_line
            ),
            LineErrorKind::Tag { field, error } => {
                write!(f, "line {}: in {}: {}", self.line, field, error)
            }
            LineErrorKind::Schema { detail } => write!(f, "line {}: {}", self.line, detail),
        }
    }
}

/// Aggregate load failure: every line error found, up to the cap.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct LoadError {
    pub errors: Vec<LineError>,
    pub truncated: bool,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "corpus load failed with {} error(s):", self.errors.len())?;
        for error in &self.errors {
            writeln!(f, "  {error}")?;
        }
        if self.truncated {
            writeln!(f, "  ... further errors suppressed")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SaveError {
    #[error("record {record_id:?} cannot be encoded as TSV: {reason}")]
    TsvUnencodable { record_id: String, reason: String },
}

/// Raw JSONL line shape; tagged text stays a string until tag parsing.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    source: String,
    #[serde(default, deserialize_with = "targets_rejecting_duplicates")]
    targets: IndexMap<String, String>,
}

fn targets_rejecting_duplicates<'de, D>(
    deserializer: D,
) -> Result<IndexMap<String, String>, D::Error>
where
    D: Deserializer<'de>,
{
    struct TargetsVisitor;

    impl<'de> Visitor<'de> for TargetsVisitor {
        type Value = IndexMap<String, String>;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a map of system name to tagged text")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
            let mut map = IndexMap::with_capacity(access.size_hint().unwrap_or(0));
            while let Some((key, value)) = access.next_entry::<String, String>()? {
                if key.is_empty() {
                    return Err(de::Error::custom("system name must be non-empty"));
                }
                if map.insert(key.clone(), value).is_some() {
                    return Err(de::Error::custom(format!(
                        "duplicate system name {key:?} in targets"
                    )));
                }
            }
            Ok(map)
        }
    }

    deserializer.deserialize_map(TargetsVisitor)
}

struct ErrorSink {
    errors: Vec<LineError>,
    truncated: bool,
}

impl ErrorSink {
    fn new() -> Self {
        ErrorSink {
            errors: Vec::new(),
            truncated: false,
        }
    }

    fn push(&mut self, line: usize, kind: LineErrorKind) {
        if self.errors.len() >= MAX_REPORTED_ERRORS {
            self.truncated = true;
        } else {
            self.errors.push(LineError { line, kind });
        }
    }

    fn schema(&mut self, line: usize, detail: impl Into<String>) {
        self.push(
            line,
            LineErrorKind::Schema {
                detail: detail.into(),
            },
        );
    }

    fn full(&self) -> bool {
        self.truncated
    }

    fn finish(self, records: Vec<CorpusRecord>) -> Result<Corpus, LoadError> {
        if self.errors.is_empty() {
            Ok(Corpus::new(records))
        } else {
            Err(LoadError {
                errors: self.errors,
                truncated: self.truncated,
            })
        }
    }
}

/// Lines of `text`, 1-based, with CRLF tolerated and empty lines skipped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.strip_suffix('\r').unwrap_or(line)))
        .filter(|(_, line)| !line.trim().is_empty())
}

/// Records the id, reporting a duplicate; true if the id is fresh.
fn note_id(seen: &mut IndexMap<String, usize>, id: &str, line: usize, sink: &mut ErrorSink) -> bool {
    if let Some(&first_line) = seen.get(id) {
        sink.push(
            line,
            LineErrorKind::DuplicateId {
                id: id.to_string(),
                first_line,
            },
        );
        false
    } else {
        seen.insert(id.to_string(), line);
        true
    }
}

fn parse_side(
    text: &str,
    field: &str,
    line: usize,
    sink: &mut ErrorSink,
) -> Option<TaggedSentence> {
    match parse_tagged(text) {
        Ok(sentence) => Some(sentence),
        Err(error) => {
            sink.push(
                line,
                LineErrorKind::Tag {
                    field: field.to_string(),
                    error,
                },
            );
            None
        }
    }
}

fn load_jsonl(text: &str) -> Result<Corpus, LoadError> {
    let mut sink = ErrorSink::new();
    let mut seen_ids: IndexMap<String, usize> = IndexMap::new();
    let mut records = Vec::new();

    for (line, content) in content_lines(text) {
        if sink.full() {
            break;
        }
        let raw: RawRecord = match serde_json::from_str(content) {
            Ok(raw) => raw,
            Err(err) => {
                sink.schema(line, err.to_string());
                continue;
            }
        };
        if raw.id.is_empty() {
            sink.schema(line, "record id must be non-empty");
            continue;
        }
        let id_fresh = note_id(&mut seen_ids, &raw.id, line, &mut sink);

        let source = parse_side(&raw.source, "source", line, &mut sink);
        let mut targets = IndexMap::with_capacity(raw.targets.len());
        let mut targets_ok = true;
        for (system, target_text) in &raw.targets {
            match parse_side(target_text, &format!("target {system:?}"), line, &mut sink) {
                Some(sentence) => {
                    targets.insert(system.clone(), sentence);
                }
                None => targets_ok = false,
            }
        }

        if id_fresh && targets_ok {
            if let Some(source) = source {
                records.push(CorpusRecord {
                    id: raw.id,
                    source,
                    targets,
                });
            }
        }
    }

    sink.finish(records)
}

fn load_tsv(text: &str) -> Result<Corpus, LoadError> {
    let mut sink = ErrorSink::new();
    let mut seen_ids: IndexMap<String, usize> = IndexMap::new();
    let mut records = Vec::new();

    for (line, content) in content_lines(text) {
        if sink.full() {
            break;
        }
        let fields: Vec<&str> = content.split('\t').collect();
        if fields.len() != 3 {
            sink.schema(
                line,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            );
            continue;
        }
        let (id, source_text, target_text) = (fields[0], fields[1], fields[2]);
        if id.is_empty() {
            sink.schema(line, "record id must be non-empty");
            continue;
        }
        let id_fresh = note_id(&mut seen_ids, id, line, &mut sink);

        let source = parse_side(source_text, "source", line, &mut sink);
        let target = parse_side(target_text, "target \"default\"", line, &mut sink);

        if let (true, Some(source), Some(target)) = (id_fresh, source, target) {
            let mut targets = IndexMap::with_capacity(1);
            targets.insert("default".to_string(), target);
            records.push(CorpusRecord {
                id: id.to_string(),
                source,
                targets,
            });
        }
    }

    sink.finish(records)
}

fn save_jsonl(corpus: &Corpus) -> Vec<u8> {
    let mut out = Vec::new();
    for record in &corpus.records {
        let raw = RawRecord {
            id: record.id.clone(),
            source: serialize_tagged(&record.source),
            targets: record
                .targets
                .iter()
                .map(|(name, sentence)| (name.clone(), serialize_tagged(sentence)))
                .collect(),
        };
        // Struct field order fixes the key order: id, source, targets.
        out.extend_from_slice(serde_json::to_string(&raw).expect("record is serializable").as_bytes());
        out.push(b'\n');
    }
    out
}

fn save_tsv(corpus: &Corpus) -> Result<Vec<u8>, SaveError> {
    let mut out = Vec::new();
    for record in &corpus.records {
        if record.targets.len() != 1 {
            return Err(SaveError::TsvUnencodable {
                record_id: record.id.clone(),
                reason: format!(
                    "TSV encodes exactly one system per record, found {}",
                    record.targets.len()
                ),
            });
        }
        let target = record.targets.values().next().expect("one target");
        for (name, text) in [
            ("id", record.id.as_str()),
            ("source", &serialize_tagged(&record.source)),
            ("target", &serialize_tagged(target)),
        ] {
            if text.contains('\t') || text.contains('\n') || text.contains('\r') {
                return Err(SaveError::TsvUnencodable {
                    record_id: record.id.clone(),
                    reason: format!("{name} contains a tab or line break"),
                });
            }
        }
        out.extend_from_slice(record.id.as_bytes());
        out.push(b'\t');
        out.extend_from_slice(serialize_tagged(&record.source).as_bytes());
        out.push(b'\t');
        out.extend_from_slice(serialize_tagged(target).as_bytes());
        out.push(b'\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_jsonl_text(text: &str) -> Result<Corpus, LoadError> {
        Corpus::load(text, CorpusFormat::Jsonl)
    }

    #[test]
    fn loads_single_jsonl_record() {
        let corpus = load_jsonl_text(
            r#"{"id":"110","source":"that we <F1> are overreacting","targets":{"tower":"siamo troppo reattive <F1>"}}"#,
        )
        .unwrap();
        assert_eq!(corpus.records.len(), 1);
        let record = &corpus.records[0];
        assert_eq!(record.id, "110");
        assert_eq!(record.targets.len(), 1);
        assert_eq!(record.source.tag_count(), 1);
        assert_eq!(record.targets["tower"].tag_count(), 1);
        assert_eq!(corpus.systems(), vec!["tower"]);
    }

    #[test]
    fn empty_input_loads_as_empty_corpus() {
        for format in [CorpusFormat::Jsonl, CorpusFormat::Tsv] {
            let corpus = Corpus::load("", format).unwrap();
            assert!(corpus.records.is_empty());
            assert!(corpus.systems().is_empty());
        }
    }

    #[test]
    fn duplicate_ids_abort_the_load() {
        let err = load_jsonl_text(concat!(
            "{\"id\":\"7\",\"source\":\"a\",\"targets\":{}}\n",
            "{\"id\":\"7\",\"source\":\"b\",\"targets\":{}}\n",
        ))
        .unwrap_err();
        assert_eq!(err.errors.len(), 1);
        assert_eq!(err.errors[0].line, 2);
        assert!(matches!(
            &err.errors[0].kind,
            LineErrorKind::DuplicateId { id, first_line: 1 } if id == "7"
        ));
    }

    #[test]
    fn tag_errors_carry_line_field_and_offset() {
        let err = load_jsonl_text(
            r#"{"id":"1","source":"ok","targets":{"tower":"ciao <f1>"}}"#,
        )
        .unwrap_err();
        assert_eq!(err.errors.len(), 1);
        match &err.errors[0].kind {
            LineErrorKind::Tag { field, error } => {
                assert_eq!(field, "target \"tower\"");
                assert_eq!(error.offset(), 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn collects_errors_across_lines_up_to_cap() {
        let mut text = String::new();
        for i in 0..120 {
            text.push_str(&format!("{{\"id\":\"{i}\",\"source\":\"<Z1>\",\"targets\":{{}}}}\n"));
        }
        let err = load_jsonl_text(&text).unwrap_err();
        assert_eq!(err.errors.len(), 100);
        assert!(err.truncated);
    }

    #[test]
    fn rejects_duplicate_target_keys_and_unknown_fields() {
        let err = load_jsonl_text(
            r#"{"id":"1","source":"a","targets":{"x":"b","x":"c"}}"#,
        )
        .unwrap_err();
        assert!(matches!(&err.errors[0].kind, LineErrorKind::Schema { detail } if detail.contains("duplicate system")));

        let err = load_jsonl_text(r#"{"id":"1","sourse":"a","targets":{}}"#).unwrap_err();
        assert!(matches!(&err.errors[0].kind, LineErrorKind::Schema { .. }));
    }

    #[test]
    fn jsonl_round_trips_and_is_byte_stable() {
        let text = concat!(
            "{\"id\":\"a\",\"source\":\"he <M1> spoke\",\"targets\":{\"tower\":\"parlato <M1>\",\"mbart\":\"\"}}\n",
            "{\"id\":\"b\",\"source\":\"\",\"targets\":{}}\n",
        );
        let corpus = load_jsonl_text(text).unwrap();
        let bytes = corpus.save(CorpusFormat::Jsonl).unwrap();
        let reloaded = load_jsonl_text(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(corpus, reloaded);
        assert_eq!(bytes, reloaded.save(CorpusFormat::Jsonl).unwrap());
        // Fixed key order on every line.
        assert!(std::str::from_utf8(&bytes)
            .unwrap()
            .lines()
            .all(|l| l.starts_with("{\"id\":")));
    }

    #[test]
    fn tsv_loads_with_implicit_default_system() {
        let corpus = Corpus::load("7\thello <A1>\tciao <M1>\n", CorpusFormat::Tsv).unwrap();
        assert_eq!(corpus.systems(), vec!["default"]);
        let record = &corpus.records[0];
        assert_eq!(record.id, "7");
        assert_eq!(record.targets["default"].tag_count(), 1);
    }

    #[test]
    fn tsv_rejects_wrong_field_count() {
        let err = Corpus::load("7\tonly-source\n", CorpusFormat::Tsv).unwrap_err();
        assert!(matches!(&err.errors[0].kind, LineErrorKind::Schema { detail } if detail.contains("3 tab-separated")));
    }

    #[test]
    fn tsv_save_rejects_embedded_tabs_and_multi_system_records() {
        let corpus = load_jsonl_text(r#"{"id":"a\tb","source":"x","targets":{"default":"y"}}"#)
            .unwrap();
        let err = corpus.save(CorpusFormat::Tsv).unwrap_err();
        assert!(matches!(err, SaveError::TsvUnencodable { ref reason, .. } if reason.contains("tab")));

        let corpus =
            load_jsonl_text(r#"{"id":"a","source":"x","targets":{"s1":"y","s2":"z"}}"#).unwrap();
        let err = corpus.save(CorpusFormat::Tsv).unwrap_err();
        assert!(matches!(err, SaveError::TsvUnencodable { ref reason, .. } if reason.contains("one system")));
    }

    #[test]
    fn tsv_round_trips_single_default_system() {
        let text = "7\thello <A1>\tciao bella <F1>\n8\t\t\n";
        let corpus = Corpus::load(text, CorpusFormat::Tsv).unwrap();
        let bytes = corpus.save(CorpusFormat::Tsv).unwrap();
        assert_eq!(std::str::from_utf8(&bytes).unwrap(), text);
    }

    #[test]
    fn crlf_input_is_accepted() {
        let corpus = load_jsonl_text(
            "{\"id\":\"1\",\"source\":\"a\",\"targets\":{}}\r\n{\"id\":\"2\",\"source\":\"b\",\"targets\":{}}\r\n",
        )
        .unwrap();
        assert_eq!(corpus.records.len(), 2);
    }

    #[test]
    fn record_order_is_preserved() {
        let text = "{\"id\":\"z\",\"source\":\"\",\"targets\":{}}\n{\"id\":\"a\",\"source\":\"\",\"targets\":{}}\n";
        let corpus = load_jsonl_text(text).unwrap();
        let ids: Vec<&str> = corpus.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, vec!["z", "a"]);
    }
}

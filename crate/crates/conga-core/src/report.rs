//! Report construction and emission: outcome CSVs, per-sentence logs,
//! summaries and cross-system deltas.
//!
//! Every emission is byte-deterministic for a fixed input and toolkit
//! version. Reports embed a content digest of the corpus bytes so numbers
//! stay traceable to the exact input that produced them. CSV output follows
//! RFC 4180 quoting with LF line endings and UTF-8 text.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Corpus, Side};
use crate::eval::{Outcome, OutcomeKind};
use crate::metrics::{
    aggregate, percent, tag_distribution, AmbiguityStats, GenderCounts, GenderMetrics,
    TagDistribution,
};
use crate::tag::RealizedGender;
use crate::TOOLKIT_VERSION;

/// SHA-256 digest of the corpus input bytes, in `sha256:<hex>` form.
pub fn corpus_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let mut out = String::from("sha256:");
    for byte in hasher.finalize() {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

/// Per-record outcome tallies for the per-sentence log. Column sums equal
/// the summary counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceLogRow {
    pub record_id: String,
    pub system: String,
    pub match_m: u64,
    pub match_f: u64,
    pub bias_a_to_m: u64,
    pub bias_a_to_f: u64,
    pub error_m_to_f: u64,
    pub error_f_to_m: u64,
    pub unmatched_source: u64,
    pub unmatched_target_m: u64,
    pub unmatched_target_f: u64,
}

/// Everything known about one system's behaviour on the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub system: String,
    pub counts: GenderCounts,
    pub metrics: Vec<GenderMetrics>,
    pub ambiguity: AmbiguityStats,
    pub target_tags: TagDistribution,
    pub log: Vec<SentenceLogRow>,
}

/// Aggregate evaluation results across one corpus and any number of systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub toolkit_version: String,
    pub input_digest: String,
    pub source_tags: TagDistribution,
    pub systems: Vec<SystemReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("comparison requires at least two systems, report has {0}")]
    FewerThanTwoSystems(usize),
}

/// Builds the full report from per-system outcome lists.
///
/// The outcomes must come from classifying `corpus` for each named system;
/// the per-sentence log covers every record, including records contributing
/// zero outcomes.
pub fn build_report(
    corpus: &Corpus,
    outcomes_by_system: &[(String, Vec<Outcome>)],
    input_digest: String,
) -> EvaluationReport {
    let source_tags = tag_distribution(corpus, &Side::Source);
    let systems = outcomes_by_system
        .iter()
        .map(|(system, outcomes)| {
            let counts = aggregate(outcomes).with_source_tags(source_tags);
            SystemReport {
                system: system.clone(),
                metrics: RealizedGender::BOTH
                    .iter()
                    .map(|&g| counts.metrics(g))
                    .collect(),
                ambiguity: counts.ambiguity_stats(),
                target_tags: tag_distribution(corpus, &Side::Target(system.clone())),
                log: sentence_log(corpus, system, outcomes),
                counts,
            }
        })
        .collect();

    EvaluationReport {
        toolkit_version: TOOLKIT_VERSION.to_string(),
        input_digest,
        source_tags,
        systems,
    }
}

fn sentence_log(corpus: &Corpus, system: &str, outcomes: &[Outcome]) -> Vec<SentenceLogRow> {
    let mut rows: Vec<SentenceLogRow> = corpus
        .records
        .iter()
        .map(|record| SentenceLogRow {
            record_id: record.id.clone(),
            system: system.to_string(),
            ..SentenceLogRow::default()
        })
        .collect();
    let index: std::collections::HashMap<&str, usize> = corpus
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i))
        .collect();

    for outcome in outcomes {
        let row = &mut rows[index[outcome.record_id.as_str()]];
        match outcome.kind {
            OutcomeKind::Match {
                gender: RealizedGender::Masculine,
            } => row.match_m += 1,
            OutcomeKind::Match {
                gender: RealizedGender::Feminine,
            } => row.match_f += 1,
            OutcomeKind::MismatchBias {
                target: RealizedGender::Masculine,
            } => row.bias_a_to_m += 1,
            OutcomeKind::MismatchBias {
                target: RealizedGender::Feminine,
            } => row.bias_a_to_f += 1,
            OutcomeKind::MismatchError {
                target: RealizedGender::Feminine,
                ..
            } => row.error_m_to_f += 1,
            OutcomeKind::MismatchError {
                target: RealizedGender::Masculine,
                ..
            } => row.error_f_to_m += 1,
            OutcomeKind::UnmatchedSourceEntity { .. } => row.unmatched_source += 1,
            OutcomeKind::UnmatchedTargetTag {
                target: RealizedGender::Masculine,
            } => row.unmatched_target_m += 1,
            OutcomeKind::UnmatchedTargetTag {
                target: RealizedGender::Feminine,
            } => row.unmatched_target_f += 1,
        }
    }
    rows
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

/// Quotes a field per RFC 4180 when it contains a comma, quote or line break.
fn csv_field(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn csv_row(fields: &[String]) -> String {
    let mut row = fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",");
    row.push('\n');
    row
}

/// One row per outcome, in outcome order:
/// `record_id,system,entity_index,token_position,category,source_gender,target_gender`.
///
/// Absent fields (a position for an unrealised source entity, a source
/// gender for an orphan target tag) are empty cells.
pub fn emit_outcome_csv(outcomes: &[Outcome]) -> Vec<u8> {
    let mut out = String::from(
        "record_id,system,entity_index,token_position,category,source_gender,target_gender\n",
    );
    for outcome in outcomes {
        out.push_str(&csv_row(&[
            outcome.record_id.clone(),
            outcome.system.clone(),
            outcome.entity.to_string(),
            outcome
                .token_position
                .map(|p| p.to_string())
                .unwrap_or_default(),
            outcome.kind.category().to_string(),
            outcome
                .kind
                .source_gender()
                .map(|g| g.to_string())
                .unwrap_or_default(),
            outcome
                .kind
                .target_gender()
                .map(|g| g.to_string())
                .unwrap_or_default(),
        ]));
    }
    out.into_bytes()
}

/// Per-sentence log as CSV, one row per record.
pub fn emit_sentence_log(log: &[SentenceLogRow]) -> Vec<u8> {
    let mut out = String::from(
        "record_id,system,match_m,match_f,bias_a_to_m,bias_a_to_f,error_m_to_f,error_f_to_m,\
         unmatched_source,unmatched_target_m,unmatched_target_f\n",
    );
    for row in log {
        out.push_str(&csv_row(&[
            row.record_id.clone(),
            row.system.clone(),
            row.match_m.to_string(),
            row.match_f.to_string(),
            row.bias_a_to_m.to_string(),
            row.bias_a_to_f.to_string(),
            row.error_m_to_f.to_string(),
            row.error_f_to_m.to_string(),
            row.unmatched_source.to_string(),
            row.unmatched_target_m.to_string(),
            row.unmatched_target_f.to_string(),
        ]));
    }
    out.into_bytes()
}

// ---------------------------------------------------------------------------
// Summary emission
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryFormat {
    Json,
    Table,
}

/// Renders the report either as JSON (the full [`EvaluationReport`]
/// structure, pretty-printed) or as aligned plain-text tables.
pub fn emit_summary(report: &EvaluationReport, format: SummaryFormat) -> Vec<u8> {
    match format {
        SummaryFormat::Json => {
            let mut bytes =
                serde_json::to_vec_pretty(report).expect("report serializes to JSON");
            bytes.push(b'\n');
            bytes
        }
        SummaryFormat::Table => render_tables(report).into_bytes(),
    }
}

/// An aligned table: left-justified label column, right-justified values.
fn render_table(title: &str, header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let render_row = |cells: &[String]| -> String {
        let mut line = String::from(" ");
        for (i, cell) in cells.iter().enumerate() {
            let pad = widths[i].saturating_sub(cell.chars().count());
            if i == 0 {
                line.push_str(&format!(" {cell}{}", " ".repeat(pad)));
            } else {
                line.push_str(&format!("  {}{cell}", " ".repeat(pad)));
            }
        }
        line.trim_end().to_string()
    };
    out.push_str(&render_row(header));
    out.push('\n');
    for row in rows {
        out.push_str(&render_row(row));
        out.push('\n');
    }
    out
}

fn share_cell(share: Option<f64>) -> String {
    match share {
        Some(value) => format!("{:.1}%", percent(value)),
        None => "n/a".to_string(),
    }
}

fn flags_cell(metrics: &GenderMetrics) -> String {
    if metrics.flags.is_empty() {
        String::new()
    } else {
        let names: Vec<String> = metrics
            .flags
            .iter()
            .map(|f| {
                serde_json::to_string(f)
                    .expect("flag serializes")
                    .trim_matches('"')
                    .to_string()
            })
            .collect();
        names.join("+")
    }
}

/// Tag-distribution table for a corpus: one row per gender plus the total,
/// one value column for the source and one per system.
pub fn emit_distribution_table(corpus: &Corpus) -> Vec<u8> {
    let systems: Vec<String> = corpus.systems().iter().map(|s| s.to_string()).collect();
    let source = tag_distribution(corpus, &Side::Source);
    let targets: Vec<TagDistribution> = systems
        .iter()
        .map(|s| tag_distribution(corpus, &Side::Target(s.clone())))
        .collect();
    let mut header = vec!["Gender".to_string(), "Source".to_string()];
    header.extend(systems);
    let rows = distribution_rows(&source, &targets);
    render_table("Tag distribution", &header, &rows).into_bytes()
}

fn distribution_rows(source: &TagDistribution, targets: &[TagDistribution]) -> Vec<Vec<String>> {
    fn masculine(d: &TagDistribution) -> u64 {
        d.masculine
    }
    fn feminine(d: &TagDistribution) -> u64 {
        d.feminine
    }
    fn ambiguous(d: &TagDistribution) -> u64 {
        d.ambiguous
    }
    fn total(d: &TagDistribution) -> u64 {
        d.total()
    }
    [
        ("M", masculine as fn(&TagDistribution) -> u64),
        ("F", feminine),
        ("A", ambiguous),
        ("Total", total),
    ]
    .iter()
    .map(|(label, value)| {
        let mut row = vec![label.to_string(), value(source).to_string()];
        row.extend(targets.iter().map(|t| value(t).to_string()));
        row
    })
    .collect()
}

/// Plain-text rendering: tag distribution, match/mismatch categories,
/// per-gender metrics and ambiguity resolution, one value column per system.
fn render_tables(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Evaluation summary");
    let _ = writeln!(out, "  toolkit version: {}", report.toolkit_version);
    let _ = writeln!(out, "  input digest:    {}", report.input_digest);
    let _ = writeln!(out);

    let system_names: Vec<String> = report.systems.iter().map(|s| s.system.clone()).collect();

    // Tag distribution.
    let mut header = vec!["Gender".to_string(), "Source".to_string()];
    header.extend(system_names.iter().cloned());
    let target_distributions: Vec<TagDistribution> =
        report.systems.iter().map(|s| s.target_tags).collect();
    let rows = distribution_rows(&report.source_tags, &target_distributions);
    out.push_str(&render_table("Tag distribution", &header, &rows));
    let _ = writeln!(out);

    // Match and mismatch categories.
    let mut header = vec!["Category".to_string()];
    header.extend(system_names.iter().cloned());
    let category_rows: Vec<(&str, Box<dyn Fn(&GenderCounts) -> u64>)> = vec![
        ("Match M", Box::new(|c| c.matches.masculine)),
        ("Match F", Box::new(|c| c.matches.feminine)),
        ("Total matches", Box::new(GenderCounts::total_matches)),
        ("Bias A→M", Box::new(|c| c.biases_into.masculine)),
        ("Bias A→F", Box::new(|c| c.biases_into.feminine)),
        ("Error M→F", Box::new(|c| c.errors_into.feminine)),
        ("Error F→M", Box::new(|c| c.errors_into.masculine)),
        ("Total mismatches", Box::new(GenderCounts::total_mismatches)),
        (
            "Unmatched source entities",
            Box::new(|c| c.unmatched_source_entities),
        ),
        ("Unmatched target M", Box::new(|c| c.unmatched_target.masculine)),
        ("Unmatched target F", Box::new(|c| c.unmatched_target.feminine)),
    ];
    let rows: Vec<Vec<String>> = category_rows
        .iter()
        .map(|(label, value)| {
            let mut row = vec![label.to_string()];
            row.extend(report.systems.iter().map(|s| value(&s.counts).to_string()));
            row
        })
        .collect();
    out.push_str(&render_table("Match and mismatch categories", &header, &rows));
    let _ = writeln!(out);

    // Per-gender metrics.
    let header = vec![
        "System".to_string(),
        "Gender".to_string(),
        "Precision".to_string(),
        "Recall".to_string(),
        "F1".to_string(),
        "Flags".to_string(),
    ];
    let mut rows = Vec::new();
    for system in &report.systems {
        for metrics in &system.metrics {
            rows.push(vec![
                system.system.clone(),
                metrics.gender.clone(),
                format!("{:.1}%", percent(metrics.precision)),
                format!("{:.1}%", percent(metrics.recall)),
                format!("{:.1}%", percent(metrics.f1)),
                flags_cell(metrics),
            ]);
        }
    }
    out.push_str(&render_table("Precision / recall / F1", &header, &rows));
    let _ = writeln!(out);

    // Ambiguity resolution.
    let header = vec![
        "System".to_string(),
        "A→M".to_string(),
        "A→F".to_string(),
        "Masculine share".to_string(),
    ];
    let rows: Vec<Vec<String>> = report
        .systems
        .iter()
        .map(|s| {
            vec![
                s.system.clone(),
                s.ambiguity.a_to_m.to_string(),
                s.ambiguity.a_to_f.to_string(),
                share_cell(s.ambiguity.masculine_share),
            ]
        })
        .collect();
    out.push_str(&render_table("Ambiguity resolution", &header, &rows));

    out
}

// ---------------------------------------------------------------------------
// System comparison
// ---------------------------------------------------------------------------

/// A signed difference between two systems on one metric, in percentage
/// points of the *rendered* (one-decimal) values, so deltas always agree
/// with what the summary tables display.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub metric: String,
    pub gender: String,
    pub first: String,
    pub second: String,
    pub delta_pp: f64,
}

impl MetricDelta {
    pub fn render(&self) -> String {
        format!(
            "{} {}  {:+.1}pp  ({} vs {})",
            self.metric, self.gender, self.delta_pp, self.first, self.second
        )
    }
}

/// Pairwise metric differences, first-listed system minus second, for every
/// ordered pair of systems in the report.
pub fn compare_systems(report: &EvaluationReport) -> Result<Vec<MetricDelta>, ReportError> {
    if report.systems.len() < 2 {
        return Err(ReportError::FewerThanTwoSystems(report.systems.len()));
    }
    let mut deltas = Vec::new();
    for (i, first) in report.systems.iter().enumerate() {
        for second in report.systems.iter().skip(i + 1) {
            for (m_first, m_second) in first.metrics.iter().zip(&second.metrics) {
                for (metric, a, b) in [
                    ("precision", m_first.precision, m_second.precision),
                    ("recall", m_first.recall, m_second.recall),
                    ("f1", m_first.f1, m_second.f1),
                ] {
                    deltas.push(MetricDelta {
                        metric: metric.to_string(),
                        gender: m_first.gender.clone(),
                        first: first.system.clone(),
                        second: second.system.clone(),
                        delta_pp: percent(a) - percent(b),
                    });
                }
            }
        }
    }
    Ok(deltas)
}

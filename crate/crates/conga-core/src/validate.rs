//! Annotation-guideline linting.
//!
//! `validate` checks a loaded corpus against the annotation rules and emits
//! coded diagnostics. Source-side rules and target-side rules differ: the
//! source fixes one contextual gender per referent and may use `<A>`, while
//! the target records grammatical realisations and therefore may only carry
//! `<M>`/`<F>` — but may legitimately realise one entity with *different*
//! genders across mentions (that variation is the signal being measured, so
//! it is never a diagnostic).
//!
//! Rule table:
//!
//! | code | severity | meaning                                                      |
//! |------|----------|--------------------------------------------------------------|
//! | V001 | error    | `<A>` tag on a target sentence                                |
//! | V002 | error    | one source entity annotated with conflicting gender classes   |
//! | V003 | warning  | source entity indices are not the contiguous range `1..k`     |
//! | V004 | warning  | target tag whose entity index never occurs in the source      |
//! | V005 | warning  | source sentence has no tags at all                            |
//!
//! Validation is pure and per-record: permuting the records permutes the
//! diagnostics identically.

use std::collections::BTreeSet;
use std::fmt;

use crate::corpus::{Corpus, CorpusRecord, Side};
use crate::tag::GenderClass;

/// Closed set of lint rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleCode {
    /// Ambiguous tag on the target side.
    V001,
    /// Conflicting source genders for one entity.
    V002,
    /// Non-contiguous source entity indices.
    V003,
    /// Target tag with no source counterpart.
    V004,
    /// Untagged source sentence.
    V005,
}

impl fmt::Display for RuleCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleCode::V001 => "V001",
            RuleCode::V002 => "V002",
            RuleCode::V003 => "V003",
            RuleCode::V004 => "V004",
            RuleCode::V005 => "V005",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl Severity {
    pub fn label(self) -> &'static str {
        match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One lint finding, locatable down to the token when the rule is positional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: RuleCode,
    pub severity: Severity,
    pub record_id: String,
    pub side: Side,
    pub token_position: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    /// JSON-line form: `{"code":...,"severity":...,"record_id":...,` \
    /// `"side":...,"system":...,"position":...,"message":...}`.
    pub fn to_json_line(&self) -> String {
        let (side, system) = match &self.side {
            Side::Source => ("source", None),
            Side::Target(name) => ("target", Some(name.as_str())),
        };
        serde_json::json!({
            "code": self.code.to_string(),
            "severity": self.severity.label(),
            "record_id": self.record_id,
            "side": side,
            "system": system,
            "position": self.token_position,
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:7} record {} {}",
            self.code, self.severity, self.record_id, self.side
        )?;
        if let Some(pos) = self.token_position {
            write!(f, " token {pos}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Lints every record, in record order; an empty result means the corpus is
/// guideline-clean.
pub fn validate(corpus: &Corpus) -> Vec<Diagnostic> {
    corpus.records.iter().flat_map(validate_record).collect()
}

/// Diagnostics for a single record, ordered by (side, position, code) with
/// the source side first and sentence-level findings before positional ones.
pub fn validate_record(record: &CorpusRecord) -> Vec<Diagnostic> {
    let mut diagnostics = Vec::new();
    let source_entities = record.source.entity_map();

    // V005: inert source.
    if record.source.tag_count() == 0 {
        diagnostics.push(Diagnostic {
            code: RuleCode::V005,
            severity: Severity::Warning,
            record_id: record.id.clone(),
            side: Side::Source,
            token_position: None,
            message: "source sentence has no gender tags and is inert for evaluation".to_string(),
        });
    }

    // V003: entity indices should be exactly 1..k.
    if !source_entities.is_empty() {
        let indices: Vec<u32> = source_entities.keys().map(|i| i.get()).collect();
        let contiguous = indices
            .iter()
            .enumerate()
            .all(|(i, &index)| index == i as u32 + 1);
        if !contiguous {
            let got: Vec<String> = indices.iter().map(u32::to_string).collect();
            diagnostics.push(Diagnostic {
                code: RuleCode::V003,
                severity: Severity::Warning,
                record_id: record.id.clone(),
                side: Side::Source,
                token_position: None,
                message: format!(
                    "source entity indices {{{}}} are not the contiguous range 1..{}",
                    got.join(","),
                    indices.len()
                ),
            });
        }
    }

    // V002: one contextual gender per source entity.
    for (entity, mentions) in &source_entities {
        let first_gender = mentions[0].1;
        if let Some(&(position, gender)) =
            mentions.iter().find(|&&(_, gender)| gender != first_gender)
        {
            diagnostics.push(Diagnostic {
                code: RuleCode::V002,
                severity: Severity::Error,
                record_id: record.id.clone(),
                side: Side::Source,
                token_position: Some(position),
                message: format!(
                    "source entity {entity} is tagged both {first_gender} and {gender}; \
                     the source fixes one contextual gender per referent"
                ),
            });
        }
    }

    // Source diagnostics ordered by (position, code); None sorts first.
    diagnostics.sort_by(|a, b| {
        (a.token_position, a.code).cmp(&(b.token_position, b.code))
    });

    // Target sides, in target-map order.
    let source_indices: BTreeSet<u32> = source_entities.keys().map(|i| i.get()).collect();
    for (system, target) in &record.targets {
        let mut target_diags = Vec::new();
        for (position, tag) in target.tags() {
            if tag.gender == GenderClass::Ambiguous {
                target_diags.push(Diagnostic {
                    code: RuleCode::V001,
                    severity: Severity::Error,
                    record_id: record.id.clone(),
                    side: Side::Target(system.clone()),
                    token_position: Some(position),
                    message: format!(
                        "ambiguous tag <A{}> on the target side; targets may only realise <M> or <F>",
                        tag.entity
                    ),
                });
            }
            if !source_indices.contains(&tag.entity.get()) {
                target_diags.push(Diagnostic {
                    code: RuleCode::V004,
                    severity: Severity::Warning,
                    record_id: record.id.clone(),
                    side: Side::Target(system.clone()),
                    token_position: Some(position),
                    message: format!(
                        "target tag <{}{}> has no source entity with index {}; \
                         evaluation will report it as unmatched",
                        tag.gender, tag.entity, tag.entity
                    ),
                });
            }
        }
        target_diags.sort_by(|a, b| (a.token_position, a.code).cmp(&(b.token_position, b.code)));
        diagnostics.extend(target_diags);
    }

    diagnostics
}

/// True if any diagnostic blocks evaluation: errors always do, warnings only
/// under strict mode.
pub fn has_blocking(diagnostics: &[Diagnostic], strict: bool) -> bool {
    diagnostics
        .iter()
        .any(|d| d.severity == Severity::Error || strict)
}

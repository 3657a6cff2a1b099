//! Entity alignment and outcome classification.
//!
//! Alignment is strictly by entity index: a target tag `<F2>` is compared
//! against whatever gender the source assigned to entity 2. Every target tag
//! receives exactly one outcome, and every source entity with no realisation
//! in the target receives one `UnmatchedSourceEntity` outcome. The counting
//! unit is the individual target tag, never the entity, so one entity
//! realised twice produces two outcomes.
//!
//! Classification refuses corpora it would have to guess about: a source
//! entity with conflicting genders has no single gold reading, and an
//! ambiguous tag on the target side has no defined comparison. Run the
//! validator first; its error-severity rules (V001, V002) are exactly the
//! preconditions enforced here.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::corpus::{Corpus, CorpusRecord};
use crate::tag::{EntityIndex, GenderClass, RealizedGender};

/// Classification of one target tag, or of one orphan source entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutcomeKind {
    /// Target realises the gender the source specified.
    Match { gender: RealizedGender },
    /// Target contradicts an explicit source gender (M->F or F->M).
    MismatchError {
        source: RealizedGender,
        target: RealizedGender,
    },
    /// Target picks a gender for a source-ambiguous referent (A->M or A->F).
    MismatchBias { target: RealizedGender },
    /// Source entity with no gendered realisation in the target.
    UnmatchedSourceEntity { source: GenderClass },
    /// Target tag whose entity index never occurs in the source.
    UnmatchedTargetTag { target: RealizedGender },
}

impl OutcomeKind {
    /// Short category name used in CSV output.
    pub fn category(&self) -> &'static str {
        match self {
            OutcomeKind::Match { .. } => "match",
            OutcomeKind::MismatchError { .. } => "error",
            OutcomeKind::MismatchBias { .. } => "bias",
            OutcomeKind::UnmatchedSourceEntity { .. } => "unmatched_source",
            OutcomeKind::UnmatchedTargetTag { .. } => "unmatched_target",
        }
    }

    /// Source-side gender involved, when defined.
    pub fn source_gender(&self) -> Option<GenderClass> {
        match self {
            OutcomeKind::Match { gender } => Some(gender.class()),
            OutcomeKind::MismatchError { source, .. } => Some(source.class()),
            OutcomeKind::MismatchBias { .. } => Some(GenderClass::Ambiguous),
            OutcomeKind::UnmatchedSourceEntity { source } => Some(*source),
            OutcomeKind::UnmatchedTargetTag { .. } => None,
        }
    }

    /// Target-side gender involved, when defined.
    pub fn target_gender(&self) -> Option<RealizedGender> {
        match self {
            OutcomeKind::Match { gender } => Some(*gender),
            OutcomeKind::MismatchError { target, .. } => Some(*target),
            OutcomeKind::MismatchBias { target } => Some(*target),
            OutcomeKind::UnmatchedSourceEntity { .. } => None,
            OutcomeKind::UnmatchedTargetTag { target } => Some(*target),
        }
    }
}

/// One classified item, traceable to its record, system, entity and (for
/// target-tag outcomes) token position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub record_id: String,
    pub system: String,
    pub entity: EntityIndex,
    /// Target token position; absent for `UnmatchedSourceEntity`.
    pub token_position: Option<usize>,
    pub kind: OutcomeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("record {record_id:?} has no target for system {system:?}")]
    UnknownSystem { record_id: String, system: String },
    #[error("record {record_id:?} violates evaluation preconditions: {detail}")]
    PreconditionViolated { record_id: String, detail: String },
}

/// Display-friendly single-record source map: entity -> contextual gender.
fn source_gender_map(
    record: &CorpusRecord,
) -> Result<BTreeMap<EntityIndex, GenderClass>, EvalError> {
    let mut map = BTreeMap::new();
    for (_, tag) in record.source.tags() {
        match map.get(&tag.entity) {
            None => {
                map.insert(tag.entity, tag.gender);
            }
            Some(&gender) if gender == tag.gender => {}
            Some(&gender) => {
                return Err(EvalError::PreconditionViolated {
                    record_id: record.id.clone(),
                    detail: format!(
                        "source entity {} is tagged both {} and {} (V002)",
                        tag.entity, gender, tag.gender
                    ),
                });
            }
        }
    }
    Ok(map)
}

/// Classifies every target tag and every orphan source entity of one record
/// for the named system.
///
/// Output order is fixed: target-tag outcomes in token order, then orphan
/// source entities in ascending index order. Classification depends only on
/// this record, so records may be processed on any schedule and concatenated
/// deterministically afterwards.
pub fn classify_record(record: &CorpusRecord, system: &str) -> Result<Vec<Outcome>, EvalError> {
    let target = record
        .targets
        .get(system)
        .ok_or_else(|| EvalError::UnknownSystem {
            record_id: record.id.clone(),
            system: system.to_string(),
        })?;
    let source_map = source_gender_map(record)?;

    let mut outcomes = Vec::new();
    let mut realised: BTreeSet<EntityIndex> = BTreeSet::new();

    for (position, tag) in target.tags() {
        let target_gender =
            tag.gender
                .as_realized()
                .ok_or_else(|| EvalError::PreconditionViolated {
                    record_id: record.id.clone(),
                    detail: format!(
                        "ambiguous tag <A{}> at target token {} (V001)",
                        tag.entity, position
                    ),
                })?;
        realised.insert(tag.entity);
        let kind = match source_map.get(&tag.entity) {
            None => OutcomeKind::UnmatchedTargetTag {
                target: target_gender,
            },
            Some(GenderClass::Ambiguous) => OutcomeKind::MismatchBias {
                target: target_gender,
            },
            Some(source) => {
                let source = source.as_realized().expect("source gender is M or F");
                if source == target_gender {
                    OutcomeKind::Match {
                        gender: target_gender,
                    }
                } else {
                    OutcomeKind::MismatchError {
                        source,
                        target: target_gender,
                    }
                }
            }
        };
        outcomes.push(Outcome {
            record_id: record.id.clone(),
            system: system.to_string(),
            entity: tag.entity,
            token_position: Some(position),
            kind,
        });
    }

    // One outcome per unrealised source entity, however many mentions it has.
    for (&entity, &gender) in &source_map {
        if !realised.contains(&entity) {
            outcomes.push(Outcome {
                record_id: record.id.clone(),
                system: system.to_string(),
                entity,
                token_position: None,
                kind: OutcomeKind::UnmatchedSourceEntity { source: gender },
            });
        }
    }

    Ok(outcomes)
}

/// Classifies the whole corpus for one system, record by record in corpus
/// order.
pub fn classify_corpus(corpus: &Corpus, system: &str) -> Result<Vec<Outcome>, EvalError> {
    let mut outcomes = Vec::new();
    for record in &corpus.records {
        outcomes.extend(classify_record(record, system)?);
    }
    Ok(outcomes)
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} record {} entity {}",
            self.kind.category(),
            self.record_id,
            self.entity
        )?;
        if let Some(pos) = self.token_position {
            write!(f, " token {pos}")?;
        }
        Ok(())
    }
}

//! Naive reference classifier.
//!
//! A deliberately plain nested-loop reimplementation of the alignment rules,
//! written against the public types only and sharing no code with the
//! production classifier. Property suites compare the two implementations
//! outcome-for-outcome.

use conga_core::eval::{Outcome, OutcomeKind};
use conga_core::tag::GenderClass;
use conga_core::{Corpus, CorpusRecord};

/// Classifies one record the slow way. Panics on inputs that violate the
/// evaluation preconditions; oracle callers generate valid inputs.
pub fn classify_record_naive(record: &CorpusRecord, system: &str) -> Vec<Outcome> {
    let target = record
        .targets
        .get(system)
        .unwrap_or_else(|| panic!("oracle: system {system:?} missing in record {:?}", record.id));

    let mut outcomes = Vec::new();

    // Every target tag, token by token.
    for (position, token) in target.tokens.iter().enumerate() {
        let Some(tag) = token.tag else { continue };
        let target_gender = tag
            .gender
            .as_realized()
            .expect("oracle: ambiguous target tags violate preconditions");

        // First source mention of the same entity fixes the gold gender.
        let mut source_gender: Option<GenderClass> = None;
        for source_token in &record.source.tokens {
            if let Some(source_tag) = source_token.tag {
                if source_tag.entity == tag.entity {
                    source_gender = Some(source_tag.gender);
                    break;
                }
            }
        }

        let kind = match source_gender {
            None => OutcomeKind::UnmatchedTargetTag {
                target: target_gender,
            },
            Some(GenderClass::Ambiguous) => OutcomeKind::MismatchBias {
                target: target_gender,
            },
            Some(gold) => {
                let gold = gold
                    .as_realized()
                    .expect("oracle: source genders are consistent");
                if gold == target_gender {
                    OutcomeKind::Match {
                        gender: target_gender,
                    }
                } else {
                    OutcomeKind::MismatchError {
                        source: gold,
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

    // Source entities never realised in the target, ascending.
    let mut source_entities: Vec<_> = record
        .source
        .tokens
        .iter()
        .filter_map(|token| token.tag)
        .map(|tag| tag.entity)
        .collect();
    source_entities.sort();
    source_entities.dedup();

    for entity in source_entities {
        let realised = target
            .tokens
            .iter()
            .any(|token| token.tag.is_some_and(|tag| tag.entity == entity));
        if realised {
            continue;
        }
        let gender = record
            .source
            .tokens
            .iter()
            .find_map(|token| token.tag.filter(|tag| tag.entity == entity))
            .expect("entity came from the source")
            .gender;
        outcomes.push(Outcome {
            record_id: record.id.clone(),
            system: system.to_string(),
            entity,
            token_position: None,
            kind: OutcomeKind::UnmatchedSourceEntity { source: gender },
        });
    }

    outcomes
}

/// Whole-corpus oracle: per-record results concatenated in corpus order.
pub fn classify_corpus_naive(corpus: &Corpus, system: &str) -> Vec<Outcome> {
    corpus
        .records
        .iter()
        .flat_map(|record| classify_record_naive(record, system))
        .collect()
}

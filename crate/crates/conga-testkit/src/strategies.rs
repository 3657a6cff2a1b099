//! Proptest generators for tagged sentences, corpora and outcomes.

use indexmap::IndexMap;
use proptest::collection::{btree_map, btree_set, vec};
use proptest::option;
use proptest::prelude::*;

use conga_core::eval::{Outcome, OutcomeKind};
use conga_core::tag::{
    EntityIndex, GenderClass, GenderTag, RealizedGender, TaggedSentence, TaggedToken,
};
use conga_core::{Corpus, CorpusRecord};

pub fn gender_class() -> impl Strategy<Value = GenderClass> {
    prop_oneof![
        Just(GenderClass::Masculine),
        Just(GenderClass::Feminine),
        Just(GenderClass::Ambiguous),
    ]
}

pub fn realized_gender() -> impl Strategy<Value = RealizedGender> {
    prop_oneof![
        Just(RealizedGender::Masculine),
        Just(RealizedGender::Feminine),
    ]
}

pub fn entity_index(max: u32) -> impl Strategy<Value = EntityIndex> {
    (1..=max).prop_map(|raw| EntityIndex::new(raw).expect("raw >= 1"))
}

/// A valid token surface: non-empty, whitespace-free, not `<...>`-shaped.
/// The character set leans on what real corpora contain, including angle
/// brackets and punctuation, to exercise the tag/token boundary.
pub fn surface() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[A-Za-z0-9àèéìòù'(),.:;!?\"<>-]{1,10}")
        .expect("valid regex")
        .prop_filter("surface must not be bracketed like a tag", |s| {
            !(s.starts_with('<') && s.ends_with('>'))
        })
}

pub fn gender_tag(max_entity: u32) -> impl Strategy<Value = GenderTag> {
    (gender_class(), entity_index(max_entity)).prop_map(|(gender, entity)| GenderTag::new(gender, entity))
}

pub fn tagged_token(max_entity: u32) -> impl Strategy<Value = TaggedToken> {
    (surface(), option::of(gender_tag(max_entity)))
        .prop_map(|(surface, tag)| TaggedToken::new(surface, tag).expect("surface is valid"))
}

/// Any valid tagged sentence, tags unconstrained.
pub fn tagged_sentence() -> impl Strategy<Value = TaggedSentence> {
    vec(tagged_token(5), 0..=12).prop_map(TaggedSentence::new)
}

fn record_id() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[A-Za-z0-9àè ,.;:'\"_-]{1,12}").expect("valid regex")
}

fn system_name() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-z]{1,6}").expect("valid regex")
}

/// Arbitrary storable corpus: unique ids, per-record target maps of any
/// shape. Suitable for load/save round-trip properties; not guaranteed to
/// pass evaluation preconditions.
pub fn any_corpus() -> impl Strategy<Value = Corpus> {
    btree_set(record_id(), 0..=10).prop_flat_map(|ids| {
        let ids: Vec<String> = ids.into_iter().collect();
        let records = ids
            .into_iter()
            .map(|id| {
                (
                    Just(id),
                    tagged_sentence(),
                    btree_map(system_name(), tagged_sentence(), 0..=3),
                )
                    .prop_map(|(id, source, targets)| CorpusRecord {
                        id,
                        source,
                        targets: targets.into_iter().collect::<IndexMap<_, _>>(),
                    })
            })
            .collect::<Vec<_>>();
        records.prop_map(Corpus::new)
    })
}

/// Sentence whose tag assignment is consistent with a fixed per-entity
/// gender map (the evaluation precondition for sources).
fn consistent_source(assignment: [GenderClass; 4]) -> impl Strategy<Value = TaggedSentence> {
    vec((surface(), option::of(1..=4u32)), 0..=10).prop_map(move |tokens| {
        TaggedSentence::new(
            tokens
                .into_iter()
                .map(|(surface, entity)| {
                    let tag = entity.map(|raw| {
                        GenderTag::new(
                            assignment[(raw - 1) as usize],
                            EntityIndex::new(raw).expect("raw >= 1"),
                        )
                    });
                    TaggedToken::new(surface, tag).expect("surface is valid")
                })
                .collect(),
        )
    })
}

/// Target sentence: binary genders only, entity indices possibly absent from
/// the source (captures unmatched-target cases).
fn binary_target() -> impl Strategy<Value = TaggedSentence> {
    vec((surface(), option::of((realized_gender(), 1..=6u32))), 0..=10).prop_map(|tokens| {
        TaggedSentence::new(
            tokens
                .into_iter()
                .map(|(surface, tag)| {
                    let tag = tag.map(|(gender, raw)| {
                        GenderTag::new(gender.class(), EntityIndex::new(raw).expect("raw >= 1"))
                    });
                    TaggedToken::new(surface, tag).expect("surface is valid")
                })
                .collect(),
        )
    })
}

/// A record that satisfies the evaluation preconditions for every system in
/// `systems`: consistent source genders, no ambiguous target tags.
pub fn eval_record(id: String, systems: Vec<String>) -> impl Strategy<Value = CorpusRecord> {
    ([gender_class(), gender_class(), gender_class(), gender_class()])
        .prop_flat_map(move |assignment| {
            let id = id.clone();
            let systems = systems.clone();
            (
                consistent_source(assignment),
                vec(binary_target(), systems.len()),
            )
                .prop_map(move |(source, targets)| CorpusRecord {
                    id: id.clone(),
                    source,
                    targets: systems.iter().cloned().zip(targets).collect(),
                })
        })
}

/// Evaluation-ready corpus over the given systems.
pub fn eval_corpus(systems: &[&str], max_records: usize) -> impl Strategy<Value = Corpus> {
    let systems: Vec<String> = systems.iter().map(|s| s.to_string()).collect();
    (0..=max_records).prop_flat_map(move |n| {
        let records: Vec<_> = (0..n)
            .map(|i| eval_record(format!("r{i}"), systems.clone()))
            .collect();
        records.prop_map(Corpus::new)
    })
}

/// A structurally valid outcome (error source and target genders differ);
/// useful for aggregation algebra, which only reads variants and genders.
pub fn outcome() -> impl Strategy<Value = Outcome> {
    let kind = prop_oneof![
        realized_gender().prop_map(|gender| OutcomeKind::Match { gender }),
        prop_oneof![
            Just((RealizedGender::Masculine, RealizedGender::Feminine)),
            Just((RealizedGender::Feminine, RealizedGender::Masculine)),
        ]
        .prop_map(|(source, target)| OutcomeKind::MismatchError { source, target }),
        realized_gender().prop_map(|target| OutcomeKind::MismatchBias { target }),
        gender_class().prop_map(|source| OutcomeKind::UnmatchedSourceEntity { source }),
        realized_gender().prop_map(|target| OutcomeKind::UnmatchedTargetTag { target }),
    ];
    (
        proptest::string::string_regex("r[0-9]{1,3}").expect("valid regex"),
        system_name(),
        entity_index(6),
        option::of(0..20usize),
        kind,
    )
        .prop_map(|(record_id, system, entity, token_position, kind)| Outcome {
            record_id,
            system,
            entity,
            token_position,
            kind,
        })
}

//! Structure-preserving corpus transformations used by invariance suites.

use conga_core::tag::{EntityIndex, GenderTag, TaggedSentence, TaggedToken};
use conga_core::{Corpus, CorpusRecord};

fn relabel_sentence(sentence: &TaggedSentence, mapping: &dyn Fn(u32) -> u32) -> TaggedSentence {
    TaggedSentence::new(
        sentence
            .tokens
            .iter()
            .map(|token| {
                let tag = token.tag.map(|tag| {
                    GenderTag::new(
                        tag.gender,
                        EntityIndex::new(mapping(tag.entity.get()))
                            .expect("mapping must stay positive"),
                    )
                });
                TaggedToken::new(token.surface(), tag).expect("surface unchanged")
            })
            .collect(),
    )
}

/// Applies one entity-index bijection to both sides of a record.
pub fn relabel_record(record: &CorpusRecord, mapping: &dyn Fn(u32) -> u32) -> CorpusRecord {
    CorpusRecord {
        id: record.id.clone(),
        source: relabel_sentence(&record.source, mapping),
        targets: record
            .targets
            .iter()
            .map(|(system, sentence)| (system.clone(), relabel_sentence(sentence, mapping)))
            .collect(),
    }
}

/// Appends a copy of every record (fresh ids), doubling all tallies.
pub fn duplicate_records(corpus: &Corpus) -> Corpus {
    let mut records = corpus.records.clone();
    records.extend(corpus.records.iter().map(|record| CorpusRecord {
        id: format!("{}+dup", record.id),
        ..record.clone()
    }));
    Corpus::new(records)
}

//! Deterministic synthetic fixtures.
//!
//! `reference_counts_corpus` builds the corpus behind `fixtures/paper.jsonl`:
//! a mechanically constructed two-system corpus whose classification
//! outcomes and tag distributions reproduce the reference totals pinned by
//! the acceptance suite. Each record contributes exactly one outcome to
//! exactly one category of one system (the other system's target is left
//! empty), plus padding records that top the source-side tag distribution up
//! to its target totals.

use conga_core::corpus::CorpusFormat;
use conga_core::tag::parse_tagged;
use conga_core::{Corpus, CorpusRecord};
use indexmap::IndexMap;

pub const TOWER: &str = "tower";
pub const MBART: &str = "mbart";

/// Target category sizes for one system.
#[derive(Debug, Clone, Copy)]
pub struct SystemCounts {
    pub match_m: usize,
    pub match_f: usize,
    pub bias_a_to_m: usize,
    pub bias_a_to_f: usize,
    pub error_m_to_f: usize,
    pub error_f_to_m: usize,
    pub unmatched_target_m: usize,
    pub unmatched_target_f: usize,
}

/// Reference totals for the two systems.
pub const TOWER_COUNTS: SystemCounts = SystemCounts {
    match_m: 173,
    match_f: 104,
    bias_a_to_m: 215,
    bias_a_to_f: 35,
    error_m_to_f: 0,
    error_f_to_m: 8,
    unmatched_target_m: 148,
    unmatched_target_f: 71,
};

pub const MBART_COUNTS: SystemCounts = SystemCounts {
    match_m: 165,
    match_f: 88,
    bias_a_to_m: 221,
    bias_a_to_f: 29,
    error_m_to_f: 2,
    error_f_to_m: 25,
    unmatched_target_m: 159,
    unmatched_target_f: 62,
};

/// Source-side tag totals the padded corpus must reach.
pub const SOURCE_M: usize = 356;
pub const SOURCE_F: usize = 294;
pub const SOURCE_A: usize = 909;

fn record(id: String, source: &str, tower: &str, mbart: &str) -> CorpusRecord {
    let mut targets = IndexMap::with_capacity(2);
    targets.insert(TOWER.to_string(), parse_tagged(tower).expect("valid fixture text"));
    targets.insert(MBART.to_string(), parse_tagged(mbart).expect("valid fixture text"));
    CorpusRecord {
        id,
        source: parse_tagged(source).expect("valid fixture text"),
        targets,
    }
}

/// The two-system corpus reproducing the reference counts.
pub fn reference_counts_corpus() -> Corpus {
    let mut records = Vec::new();

    // (prefix, source, tagged target) per category; the target text lands on
    // the system being filled, the other system's target stays empty.
    let categories: [(&str, &str, &str); 8] = [
        ("match-m", "the king <M1> waved", "il re <M1> salutava"),
        ("match-f", "the queen <F1> waved", "la regina <F1> salutava"),
        ("bias-m", "the student <A1> arrived", "lo studente <M1> arrivava"),
        ("bias-f", "the student <A1> arrived", "la studentessa <F1> arrivava"),
        ("error-mf", "the actor <M1> left", "l'attrice <F1> usciva"),
        ("error-fm", "the teacher <F1> was tired", "il maestro <M1> era stanco"),
        ("unm-t-m", "nothing marked here", "un collega <M1> passava"),
        ("unm-t-f", "nothing marked here", "una collega <F1> passava"),
    ];

    for (system, counts) in [(TOWER, TOWER_COUNTS), (MBART, MBART_COUNTS)] {
        let sizes = [
            counts.match_m,
            counts.match_f,
            counts.bias_a_to_m,
            counts.bias_a_to_f,
            counts.error_m_to_f,
            counts.error_f_to_m,
            counts.unmatched_target_m,
            counts.unmatched_target_f,
        ];
        for ((prefix, source, target), size) in categories.iter().zip(sizes) {
            for i in 0..size {
                let id = format!("{system}-{prefix}-{:04}", i + 1);
                let (tower_text, mbart_text) = if system == TOWER {
                    (*target, "")
                } else {
                    ("", *target)
                };
                records.push(record(id, source, tower_text, mbart_text));
            }
        }
    }

    // Source-side padding up to the published tag distribution.
    let used_m = TOWER_COUNTS.match_m + MBART_COUNTS.match_m + MBART_COUNTS.error_m_to_f;
    let used_f = TOWER_COUNTS.match_f
        + TOWER_COUNTS.error_f_to_m
        + MBART_COUNTS.match_f
        + MBART_COUNTS.error_f_to_m;
    let used_a = TOWER_COUNTS.bias_a_to_m
        + TOWER_COUNTS.bias_a_to_f
        + MBART_COUNTS.bias_a_to_m
        + MBART_COUNTS.bias_a_to_f;
    let pads = [
        ("pad-m", SOURCE_M - used_m, "the father <M1> slept"),
        ("pad-f", SOURCE_F - used_f, "the mother <F1> slept"),
        ("pad-a", SOURCE_A - used_a, "the visitor <A1> slept"),
    ];
    for (prefix, count, source) in pads {
        for i in 0..count {
            records.push(record(format!("{prefix}-{:04}", i + 1), source, "", ""));
        }
    }

    Corpus::new(records)
}

/// Four worked sentence pairs covering every outcome category, one per
/// record, with both systems' variants.
pub fn worked_examples_corpus() -> Corpus {
    let rows: [(&str, &str, &str, &str); 4] = [
        (
            "110",
            "Women have been trained to think that we <F1> are overreacting or that we're <F1> being too sensitive or unreasonable.",
            "Alle donne è stato insegnato a pensare che siamo troppo reattive <F1> o che siamo troppo sensibili o irragionevoli.",
            "Le donne sono state addestrate a pensare che siamo troppo reattive <F1> o che siamo troppo sensibili o irragionevoli.",
        ),
        (
            "164",
            "Many of the women working with me had to leave once they <F2> got married, because their husbands wouldn't let them <F2> work.",
            "Molte delle donne che lavoravano con me hanno dovuto lasciare il lavoro non appena si sono sposate <F2> perché i mariti non li <M2> volevano vedere lavorare.",
            "Molte delle donne che lavoravano con me dovevano andare via una volta sposate <F2> perché i loro mariti non li <M2> lasciavano lavorare.",
        ),
        (
            "125",
            "And he said, \"No, you <A1> 're still dry, you <A1> 're just being nice.\"",
            "sei ancora asciutta <F1> stai solo facendo il bravo <M1>",
            "No, sei ancora secco <M1> , stai solo facendo bene.",
        ),
        (
            "526",
            "Lindsay Malloy <A1> : They <A2> told Brendan <M3> that honesty would \"set him <M3> free,\" but they <A2> were completely convinced of his guilt at that point.",
            "Lindsay Malloy : A Brendan dissero che l'onestà lo avrebbe \"liberato\" <M3> ma erano completamente convinti <M2> della sua colpevolezza a quel punto.",
            "Lindsay Malloy : Hanno detto a Brendan che l'onestà lo avrebbe liberato <M3> ma erano completamente convinti <M2> della sua colpa a quel punto.",
        ),
    ];
    Corpus::new(
        rows.into_iter()
            .map(|(id, source, tower, mbart)| record(id.to_string(), source, tower, mbart))
            .collect(),
    )
}

/// One guideline-clean sentence pair; the validator must stay silent on it.
pub fn clean_corpus() -> Corpus {
    let source = "Women have been trained to think that we <F1> are overreacting or that we <F1> are being too sensitive or unreasonable.";
    let target = "Alle donne è stato insegnato a pensare che (noi) siamo troppo reattive <F1> o che (noi) siamo troppo sensibili o irragionevoli.";
    let mut targets = IndexMap::with_capacity(1);
    targets.insert(TOWER.to_string(), parse_tagged(target).expect("valid fixture text"));
    Corpus::new(vec![CorpusRecord {
        id: "110".to_string(),
        source: parse_tagged(source).expect("valid fixture text"),
        targets,
    }])
}

/// Five records, each firing exactly one of the lint rules V001..V005.
pub fn lint_corpus() -> Corpus {
    let rows: [(&str, &str, Option<&str>); 5] = [
        ("1", "someone <A1> arrived", Some("sei brave <A1>")),
        ("2", "he <M1> knows she <F1>", None),
        ("3", "we <A2> left", None),
        ("4", "a <M1> b", Some("una bella <F2> c")),
        ("5", "hello world", None),
    ];
    Corpus::new(
        rows.into_iter()
            .map(|(id, source, target)| {
                let mut targets = IndexMap::new();
                if let Some(target) = target {
                    targets.insert(
                        TOWER.to_string(),
                        parse_tagged(target).expect("valid fixture text"),
                    );
                }
                CorpusRecord {
                    id: id.to_string(),
                    source: parse_tagged(source).expect("valid fixture text"),
                    targets,
                }
            })
            .collect(),
    )
}

/// Plain untagged English lines for exercising the translation harness.
pub const PLAIN_LINES: &str = "The engineer finished the report on time.\n\
My neighbour is a teacher at the local school.\n\
They were satisfied with the final result.\n";

/// Serialized fixture set as `(relative path, bytes)` pairs.
pub fn fixture_files() -> Vec<(&'static str, Vec<u8>)> {
    vec![
        (
            "paper.jsonl",
            reference_counts_corpus()
                .save(CorpusFormat::Jsonl)
                .expect("JSONL save cannot fail"),
        ),
        (
            "examples.jsonl",
            worked_examples_corpus()
                .save(CorpusFormat::Jsonl)
                .expect("JSONL save cannot fail"),
        ),
        (
            "clean.jsonl",
            clean_corpus()
                .save(CorpusFormat::Jsonl)
                .expect("JSONL save cannot fail"),
        ),
        (
            "lint.jsonl",
            lint_corpus()
                .save(CorpusFormat::Jsonl)
                .expect("JSONL save cannot fail"),
        ),
        ("plain.txt", PLAIN_LINES.as_bytes().to_vec()),
    ]
}

//! Acceptance suite.
//!
//! One test per criterion (criterion 6 is a family of eight property
//! suites); each prints a `criterion N ...: PASS` line on success. Run with
//! `cargo test -p conga-cli --test acceptance -- --nocapture` to see the
//! lines, or rely on the per-test ok/FAILED output.

mod support;

use std::fs;
use std::time::Instant;

use proptest::prelude::*;

use conga_core::corpus::CorpusFormat;
use conga_core::eval::{classify_corpus, classify_record, OutcomeKind};
use conga_core::metrics::{aggregate, f1, tag_distribution};
use conga_core::report::EvaluationReport;
use conga_core::tag::{parse_tagged, serialize_tagged, GenderClass, RealizedGender};
use conga_core::validate::{validate, RuleCode, Severity};
use conga_core::{Corpus, Side};
use conga_testkit::http::MockProvider;
use conga_testkit::oracle::classify_corpus_naive;
use conga_testkit::strategies;
use conga_testkit::transforms::{duplicate_records, relabel_record};

use support::{conga, exit_code, fixture, normalized, stderr, stdout};

fn load_fixture(name: &str) -> Corpus {
    let text = fs::read_to_string(fixture(name)).expect("fixture readable");
    Corpus::load(&text, CorpusFormat::Jsonl).expect("fixture loads")
}

/// Runs `evaluate` for one system and returns the parsed summary report
/// along with the wall-clock duration and raw stdout.
fn evaluate_fixture(system: &str) -> (EvaluationReport, std::time::Duration, String) {
    let dir = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let output = conga(&[
        "evaluate",
        fixture("paper.jsonl").to_str().unwrap(),
        "--system",
        system,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let elapsed = started.elapsed();
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
    let report: EvaluationReport =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap())
            .expect("summary.json parses");
    (report, elapsed, stdout(&output))
}

#[test]
fn criterion_1_metrics_reproduction() {
    // (system, gender, precision %, recall %, published F1 %)
    let expected = [
        ("tower", "M", 31.8, 48.6, 38.3),
        ("tower", "F", 49.5, 35.4, 41.3),
        ("mbart", "M", 28.9, 46.3, 35.5),
        ("mbart", "F", 48.6, 29.9, 36.9),
    ];
    for system in ["tower", "mbart"] {
        let (report, elapsed, _) = evaluate_fixture(system);
        assert!(
            elapsed.as_secs_f64() < 1.0,
            "evaluate took {elapsed:?}, expected < 1 s"
        );
        let system_report = &report.systems[0];
        for (sys, gender, precision, recall, f1_published) in expected {
            if sys != system {
                continue;
            }
            let metrics = system_report
                .metrics
                .iter()
                .find(|m| m.gender == gender)
                .expect("gender row present");
            let p = metrics.precision * 100.0;
            let r = metrics.recall * 100.0;
            let f = metrics.f1 * 100.0;
            assert!(
                (p - precision).abs() <= 0.05,
                "{sys}/{gender} precision {p:.3} vs {precision} (±0.05pp)"
            );
            assert!(
                (r - recall).abs() <= 0.05,
                "{sys}/{gender} recall {r:.3} vs {recall} (±0.05pp)"
            );
            assert!(
                (f - f1_published).abs() <= 0.3,
                "{sys}/{gender} F1 {f:.3} vs {f1_published} (±0.3pp)"
            );
        }
    }
    println!("criterion 1 (metrics reproduction): PASS");
}

#[test]
fn criterion_2_classification_counts() {
    // (system, match M, match F, bias A->M, bias A->F, error M->F,
    // error F->M, total mismatches)
    let expected = [
        ("tower", 173, 104, 215, 35, 0, 8, 258),
        ("mbart", 165, 88, 221, 29, 2, 25, 277),
    ];
    let corpus = load_fixture("paper.jsonl");
    for (system, match_m, match_f, bias_m, bias_f, err_mf, err_fm, mismatches) in expected {
        let outcomes = classify_corpus(&corpus, system).expect("fixture is evaluable");
        let counts = aggregate(&outcomes);
        assert_eq!(counts.matches.masculine, match_m, "{system} match M");
        assert_eq!(counts.matches.feminine, match_f, "{system} match F");
        assert_eq!(counts.biases_into.masculine, bias_m, "{system} bias A->M");
        assert_eq!(counts.biases_into.feminine, bias_f, "{system} bias A->F");
        assert_eq!(counts.errors_into.feminine, err_mf, "{system} error M->F");
        assert_eq!(counts.errors_into.masculine, err_fm, "{system} error F->M");
        assert_eq!(counts.total_matches(), match_m + match_f);
        assert_eq!(counts.total_mismatches(), mismatches, "{system} mismatches");
    }
    // The same numbers surface through the CLI summary.
    let (_, _, summary) = evaluate_fixture("tower");
    assert!(normalized(&summary).contains("Match M 173"));
    println!("criterion 2 (classification counts): PASS");
}

#[test]
fn criterion_3_ambiguity_asymmetry() {
    let expected = [("tower", 86.0), ("mbart", 88.4)];
    for (system, share) in expected {
        let (report, _, _) = evaluate_fixture(system);
        let ambiguity = &report.systems[0].ambiguity;
        let actual = ambiguity.masculine_share.expect("share defined") * 100.0;
        assert!(
            (actual - share).abs() <= 0.1,
            "{system} masculine share {actual:.3} vs {share} (±0.1pp)"
        );
    }
    println!("criterion 3 (ambiguity asymmetry): PASS");
}

#[test]
fn criterion_4_tag_distribution() {
    // Library route: exact token-level counts per side.
    let corpus = load_fixture("paper.jsonl");
    let source = tag_distribution(&corpus, &Side::Source);
    assert_eq!(
        (source.masculine, source.feminine, source.ambiguous, source.total()),
        (356, 294, 909, 1559)
    );
    // CLI route: the rendered table carries the same numbers.
    let output = conga(&["stats", fixture("paper.jsonl").to_str().unwrap()]);
    assert_eq!(exit_code(&output), 0);
    let table = normalized(&stdout(&output));
    for row in ["M 356 544 570", "F 294 210 181", "A 909 0 0", "Total 1559 754 751"] {
        assert!(table.contains(row), "missing {row:?} in: {table}");
    }
    println!("criterion 4 (tag distribution): PASS");
}

#[test]
fn criterion_5_worked_examples() {
    use OutcomeKind::*;
    use RealizedGender::{Feminine as F, Masculine as M};
    let corpus = load_fixture("examples.jsonl");
    let record = |id: &str| {
        corpus
            .records
            .iter()
            .find(|r| r.id == id)
            .unwrap_or_else(|| panic!("record {id} present"))
    };
    let kinds = |id: &str, system: &str| -> Vec<OutcomeKind> {
        classify_record(record(id), system)
            .expect("example record classifies")
            .iter()
            .map(|o| o.kind)
            .collect()
    };

    assert_eq!(kinds("110", "tower"), vec![Match { gender: F }]);
    assert_eq!(
        kinds("164", "tower"),
        vec![Match { gender: F }, MismatchError { source: F, target: M }]
    );
    assert_eq!(
        kinds("125", "tower"),
        vec![MismatchBias { target: F }, MismatchBias { target: M }]
    );
    assert_eq!(
        kinds("526", "tower"),
        vec![
            Match { gender: M },
            MismatchBias { target: M },
            UnmatchedSourceEntity {
                source: GenderClass::Ambiguous
            },
        ]
    );
    let unmatched = &classify_record(record("526"), "tower").unwrap()[2];
    assert_eq!(unmatched.entity.get(), 1);

    // Second system, straight off the published variants.
    assert_eq!(kinds("110", "mbart"), vec![Match { gender: F }]);
    assert_eq!(
        kinds("164", "mbart"),
        vec![Match { gender: F }, MismatchError { source: F, target: M }]
    );
    assert_eq!(kinds("125", "mbart"), vec![MismatchBias { target: M }]);
    assert_eq!(
        kinds("526", "mbart"),
        vec![
            Match { gender: M },
            MismatchBias { target: M },
            UnmatchedSourceEntity {
                source: GenderClass::Ambiguous
            },
        ]
    );
    println!("criterion 5 (worked examples): PASS");
}

// --- criterion 6: property suites, >= 200 random cases each -----------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn criterion_6a_parse_serialize_round_trip(sentence in strategies::tagged_sentence()) {
        let reparsed = parse_tagged(&serialize_tagged(&sentence)).expect("parses");
        prop_assert_eq!(reparsed, sentence);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn criterion_6b_corpus_round_trip(corpus in strategies::any_corpus()) {
        let bytes = corpus.save(CorpusFormat::Jsonl).expect("save");
        let reloaded =
            Corpus::load(std::str::from_utf8(&bytes).expect("UTF-8"), CorpusFormat::Jsonl)
                .expect("reload");
        prop_assert_eq!(reloaded, corpus);
    }

    #[test]
    fn criterion_6c_partition_identity(corpus in strategies::eval_corpus(&["s"], 40)) {
        let outcomes = classify_corpus(&corpus, "s").expect("evaluable");
        let counts = aggregate(&outcomes);
        let tags_in_corpus: u64 = corpus
            .records
            .iter()
            .map(|r| r.targets["s"].tag_count() as u64)
            .sum();
        let partitioned: u64 = RealizedGender::BOTH
            .iter()
            .map(|&g| counts.target_tags(g))
            .sum();
        prop_assert_eq!(partitioned, tags_in_corpus);
    }

    #[test]
    fn criterion_6d_classification_equals_oracle(
        corpus in strategies::eval_corpus(&["s"], 50),
    ) {
        let fast = classify_corpus(&corpus, "s").expect("evaluable");
        let slow = classify_corpus_naive(&corpus, "s");
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn criterion_6e_merge_associative_commutative(
        a in proptest::collection::vec(strategies::outcome(), 0..40),
        b in proptest::collection::vec(strategies::outcome(), 0..40),
        c in proptest::collection::vec(strategies::outcome(), 0..40),
    ) {
        let (ca, cb, cc) = (aggregate(&a), aggregate(&b), aggregate(&c));
        let combined: Vec<_> = a.iter().chain(&b).collect();
        prop_assert_eq!(aggregate(combined.into_iter()), ca.merge(&cb));
        prop_assert_eq!(ca.merge(&cb), cb.merge(&ca));
        prop_assert_eq!(ca.merge(&cb.merge(&cc)), ca.merge(&cb).merge(&cc));
    }

    #[test]
    fn criterion_6f_f1_bounds_and_symmetry(
        p in 0.0f64..1.5,
        r in 0.0f64..1.5,
    ) {
        prop_assert_eq!(f1(p, r), f1(r, p));
        prop_assert!((f1(p, p) - p).abs() < 1e-12);
        if p > 0.0 && r > 0.0 {
            let value = f1(p, r);
            prop_assert!(value >= p.min(r) - 1e-12);
            prop_assert!(value <= p.max(r) + 1e-12);
        }
    }

    #[test]
    fn criterion_6g_relabeling_invariance(
        record in strategies::eval_record("r".to_string(), vec!["s".to_string()]),
        permutation in Just((1..=6u32).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let relabeled = relabel_record(&record, &|raw| permutation[(raw - 1) as usize]);
        let signature = |record: &conga_core::CorpusRecord| {
            let mut kinds: Vec<(String, Option<usize>)> = classify_record(record, "s")
                .expect("evaluable")
                .iter()
                .map(|o| (format!("{:?}", o.kind), o.token_position))
                .collect();
            kinds.sort();
            kinds
        };
        prop_assert_eq!(signature(&record), signature(&relabeled));
    }

    #[test]
    fn criterion_6h_duplication_scales_counts_not_ratios(
        corpus in strategies::eval_corpus(&["s"], 25),
    ) {
        let source_tags = tag_distribution(&corpus, &Side::Source);
        let counts = aggregate(&classify_corpus(&corpus, "s").expect("evaluable"))
            .with_source_tags(source_tags);

        let doubled_corpus = duplicate_records(&corpus);
        let doubled_tags = tag_distribution(&doubled_corpus, &Side::Source);
        let doubled = aggregate(&classify_corpus(&doubled_corpus, "s").expect("evaluable"))
            .with_source_tags(doubled_tags);

        prop_assert_eq!(doubled, counts.merge(&counts));
        for gender in RealizedGender::BOTH {
            let single = counts.metrics(gender);
            let double = doubled.metrics(gender);
            prop_assert_eq!(single.precision, double.precision);
            prop_assert_eq!(single.recall, double.recall);
            prop_assert_eq!(single.f1, double.f1);
        }
    }
}

#[test]
fn criterion_6_property_suites_reported() {
    // The eight suites above run as their own tests; this line just labels
    // the group in the acceptance output.
    println!("criterion 6 (property suites 6a-6h, >=200 cases each): PASS");
}

#[test]
fn criterion_7_validator_rules() {
    let diagnostics = validate(&load_fixture("lint.jsonl"));
    let summary: Vec<(RuleCode, Severity, &str, String, Option<usize>)> = diagnostics
        .iter()
        .map(|d| {
            (
                d.code,
                d.severity,
                d.record_id.as_str(),
                d.side.to_string(),
                d.token_position,
            )
        })
        .collect();
    assert_eq!(
        summary,
        vec![
            (RuleCode::V001, Severity::Error, "1", "target(tower)".to_string(), Some(1)),
            (RuleCode::V002, Severity::Error, "2", "source".to_string(), Some(2)),
            (RuleCode::V003, Severity::Warning, "3", "source".to_string(), None),
            (RuleCode::V004, Severity::Warning, "4", "target(tower)".to_string(), Some(1)),
            (RuleCode::V005, Severity::Warning, "5", "source".to_string(), None),
        ]
    );

    assert_eq!(validate(&load_fixture("clean.jsonl")), Vec::new());
    println!("criterion 7 (validator rules): PASS");
}

#[test]
fn criterion_8_determinism() {
    // Stream-only subcommands: byte-identical stdout.
    for args in [
        vec!["validate", fixture("lint.jsonl").to_str().unwrap()],
        vec!["validate", "--json", fixture("lint.jsonl").to_str().unwrap()],
        vec!["stats", fixture("paper.jsonl").to_str().unwrap()],
    ] {
        let first = conga(&args);
        let second = conga(&args);
        assert_eq!(first.stdout, second.stdout, "stdout differs for {args:?}");
    }

    // File-writing subcommands: byte-identical data files.
    let compare_runs = |args: &[&str], files: &[&str]| {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        for dir in [&dir_a, &dir_b] {
            let mut full = args.to_vec();
            full.extend(["--out", dir.path().to_str().unwrap()]);
            let output = conga(&full);
            assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
        }
        for name in files {
            let a = fs::read(dir_a.path().join(name)).unwrap();
            let b = fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between runs");
        }
    };
    compare_runs(
        &[
            "evaluate",
            fixture("paper.jsonl").to_str().unwrap(),
            "--system",
            "tower",
        ],
        &["outcomes.csv", "sentences.csv", "summary.json", "summary.txt"],
    );
    compare_runs(
        &[
            "compare",
            fixture("paper.jsonl").to_str().unwrap(),
            "--systems",
            "tower,mbart",
        ],
        &[
            "outcomes.tower.csv",
            "outcomes.mbart.csv",
            "sentences.tower.csv",
            "sentences.mbart.csv",
            "summary.json",
            "summary.txt",
            "deltas.txt",
        ],
    );

    // Translation data file against a deterministic provider. The manifest
    // is a provenance sidecar with wall-clock timestamps, so only the TSV
    // data file is compared.
    let server = MockProvider::echo("IT: ");
    let tsv_of_run = || {
        let dir = tempfile::tempdir().unwrap();
        let output = conga(&[
            "translate",
            fixture("plain.txt").to_str().unwrap(),
            "--endpoint",
            server.url(),
            "--model",
            "m",
            "--retry-delay-ms",
            "5",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));
        fs::read(dir.path().join("translations.tsv")).unwrap()
    };
    assert_eq!(tsv_of_run(), tsv_of_run());

    println!("criterion 8 (determinism): PASS");
}

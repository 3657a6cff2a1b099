//! Aggregation of outcomes into per-gender counts, precision/recall/F1 and
//! ambiguity-resolution statistics.
//!
//! All tallies are plain integer counts, so aggregation is order-insensitive
//! and [`GenderCounts::merge`] is associative and commutative: shards may be
//! aggregated in parallel and merged in any order with identical totals.
//!
//! Ratios are never clamped and never throw. A zero denominator yields 0
//! with an explicit flag, and a recall above 1 (several target tags matching
//! one source tag) is reported as-is with an over-unity flag. Percentages
//! are carried at full precision and rounded to one decimal only at render
//! time.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Side};
use crate::eval::{Outcome, OutcomeKind};
use crate::tag::{GenderClass, RealizedGender};

/// A pair of per-gender values, masculine and feminine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByGender {
    pub masculine: u64,
    pub feminine: u64,
}

impl ByGender {
    pub fn get(&self, gender: RealizedGender) -> u64 {
        match gender {
            RealizedGender::Masculine => self.masculine,
            RealizedGender::Feminine => self.feminine,
        }
    }

    fn bump(&mut self, gender: RealizedGender) {
        match gender {
            RealizedGender::Masculine => self.masculine += 1,
            RealizedGender::Feminine => self.feminine += 1,
        }
    }

    fn add(&mut self, other: &ByGender) {
        self.masculine += other.masculine;
        self.feminine += other.feminine;
    }
}

/// Token-level tag counts for one side of a corpus.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagDistribution {
    pub masculine: u64,
    pub feminine: u64,
    pub ambiguous: u64,
}

impl TagDistribution {
    pub fn total(&self) -> u64 {
        self.masculine + self.feminine + self.ambiguous
    }

    pub fn get(&self, gender: GenderClass) -> u64 {
        match gender {
            GenderClass::Masculine => self.masculine,
            GenderClass::Feminine => self.feminine,
            GenderClass::Ambiguous => self.ambiguous,
        }
    }

    fn bump(&mut self, gender: GenderClass) {
        match gender {
            GenderClass::Masculine => self.masculine += 1,
            GenderClass::Feminine => self.feminine += 1,
            GenderClass::Ambiguous => self.ambiguous += 1,
        }
    }

    fn add(&mut self, other: &TagDistribution) {
        self.masculine += other.masculine;
        self.feminine += other.feminine;
        self.ambiguous += other.ambiguous;
    }
}

/// Counts the tags of one side of the corpus, token by token.
pub fn tag_distribution(corpus: &Corpus, side: &Side) -> TagDistribution {
    let mut distribution = TagDistribution::default();
    for record in &corpus.records {
        let sentence = match side {
            Side::Source => Some(&record.source),
            Side::Target(system) => record.targets.get(system),
        };
        if let Some(sentence) = sentence {
            for (_, tag) in sentence.tags() {
                distribution.bump(tag.gender);
            }
        }
    }
    distribution
}

/// Per-gender outcome tallies for one (corpus, system) pair.
///
/// The target-side partition `target_tags(g) = matches(g) + errors_into(g) +
/// biases_into(g) + unmatched_target(g)` holds by construction because every
/// target tag is classified exactly once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderCounts {
    /// Target realises the source gender (per target gender).
    pub matches: ByGender,
    /// M->F / F->M contradictions, keyed by the *target* gender.
    pub errors_into: ByGender,
    /// A->M / A->F resolutions, keyed by the target gender.
    pub biases_into: ByGender,
    /// Target tags with no source counterpart (per target gender).
    pub unmatched_target: ByGender,
    /// Source entities never realised in the target.
    pub unmatched_source_entities: u64,
    /// Source-side tag totals, fed from [`tag_distribution`].
    pub source_tags: TagDistribution,
}

impl GenderCounts {
    /// Target tag total per gender (partition sum).
    pub fn target_tags(&self, gender: RealizedGender) -> u64 {
        self.matches.get(gender)
            + self.errors_into.get(gender)
            + self.biases_into.get(gender)
            + self.unmatched_target.get(gender)
    }

    pub fn total_matches(&self) -> u64 {
        self.matches.masculine + self.matches.feminine
    }

    pub fn total_mismatches(&self) -> u64 {
        self.errors_into.masculine
            + self.errors_into.feminine
            + self.biases_into.masculine
            + self.biases_into.feminine
    }

    pub fn with_source_tags(mut self, source_tags: TagDistribution) -> Self {
        self.source_tags = source_tags;
        self
    }

    /// Component-wise addition; associative and commutative.
    pub fn merge(mut self, other: &GenderCounts) -> Self {
        self.matches.add(&other.matches);
        self.errors_into.add(&other.errors_into);
        self.biases_into.add(&other.biases_into);
        self.unmatched_target.add(&other.unmatched_target);
        self.unmatched_source_entities += other.unmatched_source_entities;
        self.source_tags.add(&other.source_tags);
        self
    }

    /// Precision for one gender: `matches / target_tags`.
    pub fn precision(&self, gender: RealizedGender) -> Ratio {
        Ratio::of(self.matches.get(gender), self.target_tags(gender))
    }

    /// Recall for one gender: `matches / source_tags`. May exceed 1 when
    /// several target tags match one source tag.
    pub fn recall(&self, gender: RealizedGender) -> Ratio {
        Ratio::of(self.matches.get(gender), self.source_tags.get(gender.class()))
    }

    pub fn ambiguity_stats(&self) -> AmbiguityStats {
        AmbiguityStats::new(self.biases_into.masculine, self.biases_into.feminine)
    }

    pub fn metrics(&self, gender: RealizedGender) -> GenderMetrics {
        GenderMetrics::compute(self, gender)
    }
}

/// A quotient that records whether its denominator was zero instead of
/// producing NaN or an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub zero_denominator: bool,
}

impl Ratio {
    pub fn of(numerator: u64, denominator: u64) -> Ratio {
        if denominator == 0 {
            Ratio {
                value: 0.0,
                zero_denominator: true,
            }
        } else {
            Ratio {
                value: numerator as f64 / denominator as f64,
                zero_denominator: false,
            }
        }
    }
}

/// Harmonic mean of precision and recall: `2pr / (p + r)`, 0 when `p+r = 0`.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Report flag attached to a metrics row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricFlag {
    PrecisionZeroDenominator,
    RecallZeroDenominator,
    RecallOverUnity,
}

/// Precision/recall/F1 for one gender, with honesty flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderMetrics {
    pub gender: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub flags: Vec<MetricFlag>,
}

impl GenderMetrics {
    pub fn compute(counts: &GenderCounts, gender: RealizedGender) -> GenderMetrics {
        let precision = counts.precision(gender);
        let recall = counts.recall(gender);
        let mut flags = Vec::new();
        if precision.zero_denominator {
            flags.push(MetricFlag::PrecisionZeroDenominator);
        }
        if recall.zero_denominator {
            flags.push(MetricFlag::RecallZeroDenominator);
        }
        if recall.value > 1.0 {
            flags.push(MetricFlag::RecallOverUnity);
        }
        GenderMetrics {
            gender: gender.to_string(),
            precision: precision.value,
            recall: recall.value,
            f1: f1(precision.value, recall.value),
            flags,
        }
    }
}

/// How a system resolves source-ambiguous referents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityStats {
    pub a_to_m: u64,
    pub a_to_f: u64,
    /// `a_to_m / (a_to_m + a_to_f)`; `None` when no ambiguity was resolved.
    pub masculine_share: Option<f64>,
}

impl AmbiguityStats {
    pub fn new(a_to_m: u64, a_to_f: u64) -> AmbiguityStats {
        let resolved = a_to_m + a_to_f;
        AmbiguityStats {
            a_to_m,
            a_to_f,
            masculine_share: (resolved > 0).then(|| a_to_m as f64 / resolved as f64),
        }
    }
}

/// Tallies outcomes from one (corpus, system) pair.
///
/// Source tag totals cannot be recovered from outcomes (they are per-entity,
/// not per-mention), so the result carries zero `source_tags`; attach them
/// with [`GenderCounts::with_source_tags`] before computing recall.
pub fn aggregate<'a, I>(outcomes: I) -> GenderCounts
where
    I: IntoIterator<Item = &'a Outcome>,
{
    let mut counts = GenderCounts::default();
    for outcome in outcomes {
        match outcome.kind {
            OutcomeKind::Match { gender } => counts.matches.bump(gender),
            OutcomeKind::MismatchError { target, .. } => counts.errors_into.bump(target),
            OutcomeKind::MismatchBias { target } => counts.biases_into.bump(target),
            OutcomeKind::UnmatchedTargetTag { target } => counts.unmatched_target.bump(target),
            OutcomeKind::UnmatchedSourceEntity { .. } => counts.unmatched_source_entities += 1,
        }
    }
    counts
}

/// Rounds a ratio to one decimal of a percentage, the report resolution.
pub fn percent(value: f64) -> f64 {
    (value * 1000.0).round() / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusFormat;
    use crate::tag::RealizedGender as R;

    fn outcome(kind: OutcomeKind) -> Outcome {
        Outcome {
            record_id: "r".to_string(),
            system: "s".to_string(),
            entity: crate::tag::EntityIndex::new(1).unwrap(),
            token_position: Some(0),
            kind,
        }
    }

    #[test]
    fn aggregates_by_variant_and_gender() {
        let outcomes = vec![
            outcome(OutcomeKind::Match { gender: R::Masculine }),
            outcome(OutcomeKind::Match { gender: R::Masculine }),
            outcome(OutcomeKind::Match { gender: R::Feminine }),
            outcome(OutcomeKind::MismatchError {
                source: R::Feminine,
                target: R::Masculine,
            }),
            outcome(OutcomeKind::MismatchBias { target: R::Masculine }),
            outcome(OutcomeKind::UnmatchedTargetTag { target: R::Feminine }),
            outcome(OutcomeKind::UnmatchedSourceEntity {
                source: GenderClass::Ambiguous,
            }),
        ];
        let counts = aggregate(&outcomes);
        assert_eq!(counts.matches, ByGender { masculine: 2, feminine: 1 });
        assert_eq!(counts.errors_into, ByGender { masculine: 1, feminine: 0 });
        assert_eq!(counts.biases_into, ByGender { masculine: 1, feminine: 0 });
        assert_eq!(counts.unmatched_target, ByGender { masculine: 0, feminine: 1 });
        assert_eq!(counts.unmatched_source_entities, 1);
        assert_eq!(counts.target_tags(R::Masculine), 4);
        assert_eq!(counts.target_tags(R::Feminine), 2);
    }

    #[test]
    fn empty_outcomes_aggregate_to_zero() {
        assert_eq!(aggregate(&[]), GenderCounts::default());
    }

    #[test]
    fn precision_matches_published_ratios() {
        // 173/544 -> 31.8% and 88/181 -> 48.6%.
        assert_eq!(percent(Ratio::of(173, 544).value), 31.8);
        assert_eq!(percent(Ratio::of(88, 181).value), 48.6);
    }

    #[test]
    fn recall_matches_published_ratios() {
        // 173/356 -> 48.6% and 104/294 -> 35.4%.
        assert_eq!(percent(Ratio::of(173, 356).value), 48.6);
        assert_eq!(percent(Ratio::of(104, 294).value), 35.4);
    }

    #[test]
    fn zero_denominators_flag_instead_of_failing() {
        let ratio = Ratio::of(0, 0);
        assert_eq!(ratio.value, 0.0);
        assert!(ratio.zero_denominator);

        let counts = GenderCounts::default();
        let metrics = counts.metrics(R::Masculine);
        assert_eq!(metrics.precision, 0.0);
        assert_eq!(
            metrics.flags,
            vec![
                MetricFlag::PrecisionZeroDenominator,
                MetricFlag::RecallZeroDenominator
            ]
        );
    }

    #[test]
    fn over_unity_recall_is_reported_not_clamped() {
        let mut counts = GenderCounts::default();
        counts.matches.masculine = 2;
        counts.source_tags.masculine = 1;
        let metrics = counts.metrics(R::Masculine);
        assert_eq!(metrics.recall, 2.0);
        assert!(metrics.flags.contains(&MetricFlag::RecallOverUnity));
    }

    #[test]
    fn f1_is_the_harmonic_mean() {
        assert_eq!(percent(f1(0.49524, 0.35374)), 41.3);
        assert_eq!(percent(f1(0.31801, 0.48596)), 38.4);
        for x in [0.0, 0.25, 0.5, 1.0] {
            assert!((f1(x, x) - x).abs() < 1e-12);
        }
        assert_eq!(f1(0.0, 0.0), 0.0);
    }

    #[test]
    fn ambiguity_share_matches_published_ratios() {
        let tower = AmbiguityStats::new(215, 35);
        assert_eq!(percent(tower.masculine_share.unwrap()), 86.0);
        let mbart = AmbiguityStats::new(221, 29);
        assert_eq!(percent(mbart.masculine_share.unwrap()), 88.4);
        assert_eq!(AmbiguityStats::new(0, 0).masculine_share, None);
    }

    #[test]
    fn distribution_counts_tags_per_side() {
        let corpus = Corpus::load(
            concat!(
                "{\"id\":\"1\",\"source\":\"he <M1> and she <F2> or they <A3>\",\"targets\":{\"s\":\"bello <M1> bella <F2>\"}}\n",
                "{\"id\":\"2\",\"source\":\"you <A1>\",\"targets\":{\"s\":\"brava <F1>\"}}\n",
            ),
            CorpusFormat::Jsonl,
        )
        .unwrap();
        let source = tag_distribution(&corpus, &Side::Source);
        assert_eq!((source.masculine, source.feminine, source.ambiguous), (1, 1, 2));
        assert_eq!(source.total(), 4);
        let target = tag_distribution(&corpus, &Side::Target("s".to_string()));
        assert_eq!((target.masculine, target.feminine, target.ambiguous), (1, 2, 0));

        let empty = tag_distribution(&Corpus::default(), &Side::Source);
        assert_eq!(empty.total(), 0);
    }

    #[test]
    fn merge_is_componentwise() {
        let mut a = GenderCounts::default();
        a.matches.masculine = 3;
        a.source_tags.ambiguous = 5;
        let mut b = GenderCounts::default();
        b.matches.masculine = 4;
        b.unmatched_source_entities = 2;
        let merged = a.merge(&b);
        assert_eq!(merged.matches.masculine, 7);
        assert_eq!(merged.source_tags.ambiguous, 5);
        assert_eq!(merged.unmatched_source_entities, 2);
    }
}

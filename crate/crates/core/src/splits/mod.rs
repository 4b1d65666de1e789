//! Train/test tension: the joint-error lower bound, per-classifier gaps, and expectations
//! under independent random assignment of samples to the training side.

mod expect;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Counts, Dataset, Label, Pattern, PatternTable};
use crate::error::{Error, Result};

pub use expect::{
    expected_accuracy_upper, expected_delta, expected_extremes, expected_extremes_double_sum,
    expected_extremes_tail, expected_min_hinge, Extremes, EXACT_DOUBLE_SUM_LIMIT,
};

/// Train and test counts of one pattern.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitEntry {
    pub pattern: Pattern,
    pub train: Counts,
    pub test: Counts,
}

impl SplitEntry {
    /// Positive minus negative count on the training side.
    pub fn q_train(&self) -> i64 {
        self.train.pos as i64 - self.train.neg as i64
    }

    pub fn q_test(&self) -> i64 {
        self.test.pos as i64 - self.test.neg as i64
    }

    pub fn total(&self) -> Counts {
        Counts::new(
            self.train.pos + self.test.pos,
            self.train.neg + self.test.neg,
        )
    }

    /// Joint error excess of this pattern: zero when both sides agree in sign (a zero side
    /// agrees with anything), otherwise the smaller absolute imbalance.
    pub fn delta_raw(&self) -> u64 {
        let (a, b) = (self.q_train(), self.q_test());
        if a.signum() * b.signum() >= 0 {
            0
        } else {
            a.unsigned_abs().min(b.unsigned_abs())
        }
    }

    /// Training-loss gap and test-accuracy gap, in samples, of labeling this pattern `label`.
    pub fn gaps(&self, label: Label) -> (u64, u64) {
        let (tr, te) = (self.train, self.test);
        match label {
            Label::Positive => (tr.neg - tr.min(), te.max() - te.pos),
            Label::Negative => (tr.pos - tr.min(), te.max() - te.neg),
        }
    }
}

/// Per-pattern train/test counts in canonical pattern order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitTable {
    entries: Vec<SplitEntry>,
    ratio: Option<f64>,
}

impl SplitTable {
    /// Union of the two tables' patterns; a pattern missing on one side has zero counts there.
    pub fn from_tables(train: &PatternTable, test: &PatternTable) -> Self {
        let mut merged: BTreeMap<Pattern, (Counts, Counts)> = BTreeMap::new();
        for (p, c) in train.entries() {
            merged.entry(p.clone()).or_default().0 = *c;
        }
        for (p, c) in test.entries() {
            merged.entry(p.clone()).or_default().1 = *c;
        }
        SplitTable {
            entries: merged
                .into_iter()
                .map(|(pattern, (train, test))| SplitEntry {
                    pattern,
                    train,
                    test,
                })
                .collect(),
            ratio: None,
        }
    }

    /// Builds from explicit entries; patterns must be distinct.
    pub fn new(mut entries: Vec<SplitEntry>) -> Result<Self> {
        entries.retain(|e| e.total().total() > 0);
        entries.sort_by(|a, b| a.pattern.cmp(&b.pattern));
        if let Some(w) = entries.windows(2).find(|w| w[0].pattern == w[1].pattern) {
            return Err(Error::InvalidParameter(format!(
                "pattern `{}` listed twice",
                w[0].pattern
            )));
        }
        Ok(SplitTable {
            entries,
            ratio: None,
        })
    }

    pub fn with_ratio(mut self, p: f64) -> Self {
        self.ratio = Some(p);
        self
    }

    pub fn entries(&self) -> &[SplitEntry] {
        &self.entries
    }

    pub fn d(&self) -> usize {
        self.entries.len()
    }

    /// Total sample count over both sides.
    pub fn m(&self) -> u64 {
        self.entries.iter().map(|e| e.total().total()).sum()
    }

    pub fn train_size(&self) -> u64 {
        self.entries.iter().map(|e| e.train.total()).sum()
    }

    pub fn test_size(&self) -> u64 {
        self.entries.iter().map(|e| e.test.total()).sum()
    }

    /// Probability used to generate the split, if it was generated.
    pub fn ratio(&self) -> Option<f64> {
        self.ratio
    }

    pub fn parent(&self) -> PatternTable {
        PatternTable::from_entries(self.entries.iter().map(|e| (e.pattern.clone(), e.total())))
    }

    pub fn train_table(&self) -> PatternTable {
        PatternTable::from_entries(self.entries.iter().map(|e| (e.pattern.clone(), e.train)))
    }

    pub fn test_table(&self) -> PatternTable {
        PatternTable::from_entries(self.entries.iter().map(|e| (e.pattern.clone(), e.test)))
    }
}

/// Assigns each sample to the training side with probability `p`.
pub fn split_random(
    dataset: &Dataset,
    p: f64,
    seed: u64,
) -> Result<(Dataset, Dataset, SplitTable)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split ratio {p} outside (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train_rows, mut test_rows) = (Vec::new(), Vec::new());
    for row in 0..dataset.len() {
        if rng.random_bool(p) {
            train_rows.push(row);
        } else {
            test_rows.push(row);
        }
    }
    let train = dataset.select_rows(&train_rows);
    let test = dataset.select_rows(&test_rows);
    let split =
        SplitTable::from_tables(&train.pattern_table()?, &test.pattern_table()?).with_ratio(p);
    Ok((train, test, split))
}

/// Lower bound on training-loss gap plus test-accuracy gap over all classifiers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    /// Sum of `per_pattern` divided by `m`.
    pub delta: f64,
    /// Sum of `per_pattern`, in samples.
    pub delta_raw: u64,
    /// Per-pattern excess in samples, aligned with the split's entries.
    pub per_pattern: Vec<u64>,
    pub m: u64,
    /// True when every pattern has sign-consistent train and test imbalances.
    pub perfect: bool,
}

pub fn delta_lower_bound(split: &SplitTable) -> DeltaReport {
    let per_pattern: Vec<u64> = split.entries.iter().map(SplitEntry::delta_raw).collect();
    let delta_raw: u64 = per_pattern.iter().sum();
    let m = split.m();
    DeltaReport {
        delta: if m == 0 {
            0.0
        } else {
            delta_raw as f64 / m as f64
        },
        delta_raw,
        per_pattern,
        m,
        perfect: delta_raw == 0,
    }
}

/// A ±1 decision per pattern.
pub type Labeling = BTreeMap<Pattern, Label>;

/// Training-loss and test-accuracy gaps of one labeling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierGaps {
    pub delta_train: f64,
    pub delta_test: f64,
    pub train_raw: u64,
    pub test_raw: u64,
}

pub fn delta_of_classifier(split: &SplitTable, labeling: &Labeling) -> Result<ClassifierGaps> {
    let (mut train_raw, mut test_raw) = (0, 0);
    for e in &split.entries {
        let label = labeling
            .get(&e.pattern)
            .ok_or_else(|| Error::MissingPattern(e.pattern.to_string()))?;
        let (a, b) = e.gaps(*label);
        train_raw += a;
        test_raw += b;
    }
    let m = split.m().max(1) as f64;
    Ok(ClassifierGaps {
        delta_train: train_raw as f64 / m,
        delta_test: test_raw as f64 / m,
        train_raw,
        test_raw,
    })
}

/// Labels each pattern by the sign of its training imbalance (zero maps to positive).
pub fn train_optimal_labeling(split: &SplitTable) -> Labeling {
    split
        .entries
        .iter()
        .map(|e| {
            let l = if e.q_train() >= 0 {
                Label::Positive
            } else {
                Label::Negative
            };
            (e.pattern.clone(), l)
        })
        .collect()
}

/// A labeling whose summed gaps equal the lower bound.
pub fn bound_attaining_labeling(split: &SplitTable) -> Labeling {
    split
        .entries
        .iter()
        .map(|e| {
            let (a, b) = e.gaps(Label::Positive);
            let (c, d) = e.gaps(Label::Negative);
            let l = if a + b <= c + d {
                Label::Positive
            } else {
                Label::Negative
            };
            (e.pattern.clone(), l)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic_columns, FeatureLaw};
    use proptest::prelude::*;

    fn entry(name: &str, train: (u64, u64), test: (u64, u64)) -> SplitEntry {
        SplitEntry {
            pattern: Pattern::new([name]),
            train: Counts::new(train.0, train.1),
            test: Counts::new(test.0, test.1),
        }
    }

    fn label_all(split: &SplitTable, l: Label) -> Labeling {
        split
            .entries()
            .iter()
            .map(|e| (e.pattern.clone(), l))
            .collect()
    }

    #[test]
    fn per_pattern_examples() {
        assert_eq!(entry("x", (2, 0), (0, 1)).delta_raw(), 1);
        assert_eq!(entry("x", (2, 0), (3, 1)).delta_raw(), 0);
        assert_eq!(entry("x", (0, 0), (0, 5)).delta_raw(), 0);
        assert_eq!(entry("x", (1, 1), (0, 5)).delta_raw(), 0);
        assert_eq!(entry("x", (1, 4), (6, 2)).delta_raw(), 3);
    }

    #[test]
    fn classifier_gap_examples() {
        let split = SplitTable::new(vec![entry("x", (2, 0), (0, 1))]).unwrap();
        let pos = delta_of_classifier(&split, &label_all(&split, Label::Positive)).unwrap();
        assert_eq!((pos.train_raw, pos.test_raw), (0, 1));
        assert_eq!(pos.delta_test, 1.0 / 3.0);
        let neg = delta_of_classifier(&split, &label_all(&split, Label::Negative)).unwrap();
        assert_eq!((neg.train_raw, neg.test_raw), (2, 0));
        let rep = delta_lower_bound(&split);
        assert_eq!((rep.delta_raw, rep.m, rep.perfect), (1, 3, false));
    }

    #[test]
    fn consistent_split_is_perfect() {
        let split =
            SplitTable::new(vec![entry("a", (3, 1), (2, 0)), entry("b", (0, 2), (1, 1))]).unwrap();
        let rep = delta_lower_bound(&split);
        assert!(rep.perfect);
        assert_eq!(rep.delta, 0.0);
        let gaps = delta_of_classifier(&split, &bound_attaining_labeling(&split)).unwrap();
        assert_eq!((gaps.train_raw, gaps.test_raw), (0, 0));
    }

    #[test]
    fn flipped_labels_on_separated_split() {
        let split =
            SplitTable::new(vec![entry("a", (3, 0), (2, 0)), entry("b", (0, 4), (0, 1))]).unwrap();
        let flipped: Labeling = bound_attaining_labeling(&split)
            .into_iter()
            .map(|(p, l)| (p, l.flipped()))
            .collect();
        let g = delta_of_classifier(&split, &flipped).unwrap();
        // every training sample is misfit and every test sample misclassified
        assert_eq!(g.train_raw, split.train_size());
        assert_eq!(g.test_raw, split.test_size());
        // 1 - min hinge of the training table, rescaled to the full sample count
        let train = split.train_table();
        let hinge = crate::bounds::min_hinge_exact(&train).unwrap();
        let complement = (1.0 - *hinge.numer() as f64 / *hinge.denom() as f64) * train.m() as f64;
        assert_eq!(g.train_raw as f64, complement);
    }

    #[test]
    fn missing_pattern_in_labeling() {
        let split = SplitTable::new(vec![entry("a", (1, 0), (0, 1))]).unwrap();
        let err = delta_of_classifier(&split, &Labeling::new()).unwrap_err();
        assert!(matches!(err, Error::MissingPattern(p) if p == "a"));
    }

    #[test]
    fn duplicate_patterns_rejected() {
        assert!(
            SplitTable::new(vec![entry("a", (1, 0), (0, 0)), entry("a", (0, 1), (0, 0))]).is_err()
        );
    }

    #[test]
    fn random_split_is_consistent_and_deterministic() {
        let ds = generate_synthetic_columns(
            &[
                FeatureLaw::Poisson { lambda: 2.0 },
                FeatureLaw::Poisson { lambda: 1.0 },
            ],
            0.4,
            500,
            5,
        )
        .unwrap();
        let (train, test, split) = split_random(&ds, 0.7, 11).unwrap();
        assert_eq!(train.len() + test.len(), ds.len());
        assert_eq!(split.parent(), ds.pattern_table().unwrap());
        assert_eq!(split.ratio(), Some(0.7));
        let (_, _, again) = split_random(&ds, 0.7, 11).unwrap();
        assert_eq!(split, again);
        assert!(split_random(&ds, 0.0, 1).is_err());
        assert!(split_random(&ds, 1.0, 1).is_err());
    }

    #[test]
    fn train_counts_follow_binomial() {
        // one pattern with 6 positives: chi-square of the train count over 10^4 seeds
        let samples: Vec<_> = (0..6)
            .map(|_| crate::dataset::Sample {
                features: vec!["x".into()],
                label: Label::Positive,
            })
            .collect();
        let ds = Dataset::from_samples(&["f"], &samples).unwrap();
        let p = 0.3;
        let mut hist = [0u64; 7];
        let trials = 10_000;
        for seed in 0..trials {
            let (_, _, split) = split_random(&ds, p, seed).unwrap();
            hist[split.entries()[0].train.pos as usize] += 1;
        }
        let pmf = expect::binomial_pmf(6, p);
        let chi2: f64 = hist
            .iter()
            .zip(&pmf)
            .map(|(&o, &e)| {
                let e = e * trials as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        // 6 degrees of freedom; the 0.999 quantile is 22.46
        assert!(chi2 < 22.46, "chi2 = {chi2}");
    }

    fn arb_split() -> impl Strategy<Value = SplitTable> {
        prop::collection::vec((0u64..5, 0u64..5, 0u64..5, 0u64..5), 1..9).prop_map(|v| {
            SplitTable::new(
                v.into_iter()
                    .enumerate()
                    .map(|(i, (a, b, c, d))| entry(&format!("{i}"), (a, b), (c, d)))
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn bound_attained_and_never_beaten(split in arb_split()) {
            let bound = delta_lower_bound(&split);
            let best = delta_of_classifier(&split, &bound_attaining_labeling(&split)).unwrap();
            prop_assert_eq!(best.train_raw + best.test_raw, bound.delta_raw);
            for l in [Label::Positive, Label::Negative] {
                let g = delta_of_classifier(&split, &label_all(&split, l)).unwrap();
                prop_assert!(g.train_raw + g.test_raw >= bound.delta_raw);
            }
            let t = delta_of_classifier(&split, &train_optimal_labeling(&split)).unwrap();
            prop_assert_eq!(t.train_raw, 0);
        }

        // Each pattern's excess equals max(train) + max(test) - max(total).
        #[test]
        fn excess_identity(split in arb_split()) {
            for e in split.entries() {
                let lhs = e.delta_raw();
                let rhs = e.train.max() + e.test.max() - e.total().max();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}

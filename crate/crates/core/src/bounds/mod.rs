//! Exact performance ceilings and minimum losses of a pattern table.
//!
//! Every quantity here is a function of the per-pattern counts alone: no classifier can
//! rank, label or score two samples with the same feature tuple differently, so the best
//! achievable value is attained by ordering patterns by their positive fraction.

mod curves;

use std::cmp::Ordering;
use std::collections::HashMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::dataset::{Counts, Label, Pattern, PatternTable};
use crate::error::{Error, Result};

pub use curves::{optimal_pr_curve, optimal_roc_curve, trapezoid_area, CurveKind, CurvePoints};

/// Compares positive fractions exactly: `Greater` when `a` has the larger fraction.
pub fn cmp_p_plus(a: Counts, b: Counts) -> Ordering {
    let lhs = u128::from(a.pos) * u128::from(b.total());
    let rhs = u128::from(b.pos) * u128::from(a.total());
    lhs.cmp(&rhs)
}

/// Indices of `counts` by descending positive fraction; ties keep their input order.
pub fn optimal_order(counts: &[Counts]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..counts.len()).collect();
    idx.sort_by(|&i, &j| cmp_p_plus(counts[j], counts[i]));
    idx
}

pub(crate) fn ratio_to_f64(r: Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Twice the concordant-pair count of the given pattern order, with ties credited one half
/// (so the result stays an integer).
fn doubled_concordance<I: IntoIterator<Item = Counts>>(ordered: I) -> u128 {
    let mut pos_before = 0u128;
    let mut acc = 0u128;
    for c in ordered {
        let (p, n) = (u128::from(c.pos), u128::from(c.neg));
        acc += 2 * pos_before * n + p * n;
        pos_before += p;
    }
    acc
}

fn pair_denominator(table: &PatternTable) -> u128 {
    2 * u128::from(table.n_plus()) * u128::from(table.n_minus())
}

/// Upper bound on AUC-ROC as an exact fraction.
pub fn auc_roc_upper_exact(table: &PatternTable) -> Result<Ratio<u128>> {
    table.require_both_classes()?;
    let counts = table.counts();
    let num = doubled_concordance(optimal_order(&counts).into_iter().map(|i| counts[i]));
    Ok(Ratio::new(num, pair_denominator(table)))
}

/// The same bound summed over all ordered pattern pairs, `O(d^2)`.
pub fn auc_roc_upper_pairwise_exact(table: &PatternTable) -> Result<Ratio<u128>> {
    table.require_both_classes()?;
    let counts = table.counts();
    let mut num = 0u128;
    for a in &counts {
        for b in &counts {
            let ab = u128::from(a.pos) * u128::from(b.neg);
            let ba = u128::from(b.pos) * u128::from(a.neg);
            num += ab.max(ba);
        }
    }
    Ok(Ratio::new(num, pair_denominator(table)))
}

pub fn auc_roc_upper(table: &PatternTable) -> Result<f64> {
    auc_roc_upper_exact(table).map(ratio_to_f64)
}

fn resolve_ordering(table: &PatternTable, ordering: &[Pattern]) -> Result<Vec<Counts>> {
    if ordering.len() != table.d() {
        return Err(Error::InvalidOrdering(format!(
            "{} patterns given, table has {}",
            ordering.len(),
            table.d()
        )));
    }
    let mut seen = HashMap::with_capacity(ordering.len());
    ordering
        .iter()
        .map(|p| {
            let c = table
                .get(p)
                .ok_or_else(|| Error::InvalidOrdering(format!("unknown pattern `{p}`")))?;
            if seen.insert(p, ()).is_some() {
                return Err(Error::InvalidOrdering(format!("pattern `{p}` repeated")));
            }
            Ok(c)
        })
        .collect()
}

/// AUC of any classifier that ranks patterns in `ordering` (first = highest score).
pub fn ranking_auc_exact(table: &PatternTable, ordering: &[Pattern]) -> Result<Ratio<u128>> {
    table.require_both_classes()?;
    let ordered = resolve_ordering(table, ordering)?;
    Ok(Ratio::new(
        doubled_concordance(ordered),
        pair_denominator(table),
    ))
}

pub fn ranking_auc(table: &PatternTable, ordering: &[Pattern]) -> Result<f64> {
    ranking_auc_exact(table, ordering).map(ratio_to_f64)
}

/// Upper bound on AUC-PR (average precision with trapezoids).
///
/// Samples are taken in descending positive-fraction order, each contributing its pattern's
/// fraction `p` to the expected true-positive count; the area sums `p / (2 n_plus)` times the
/// sum of consecutive running precisions, where the precision before the first sample is the
/// first sample's `p`. Within a pattern group the running precision is evaluated from integers.
pub fn auc_pr_upper(table: &PatternTable) -> Result<f64> {
    table.require_both_classes()?;
    let counts = table.counts();
    let mut area = 0.0;
    let mut pos_before = 0u128;
    let mut seen = 0u128;
    let mut prev: Option<f64> = None;
    for i in optimal_order(&counts) {
        let c = counts[i];
        let (p, size) = (u128::from(c.pos), u128::from(c.total()));
        let frac = c.p_plus();
        let mut prev_precision = prev.unwrap_or(frac);
        let mut run = 0.0;
        for t in 1..=size {
            // (pos_before + t p / size) / (seen + t)
            let precision = (size * pos_before + t * p) as f64 / (size * (seen + t)) as f64;
            run += prev_precision + precision;
            prev_precision = precision;
        }
        area += frac * run;
        prev = Some(prev_precision);
        pos_before += p;
        seen += size;
    }
    Ok(area / (2.0 * table.n_plus() as f64))
}

/// The same area by literal expansion into one positive fraction per sample.
pub fn auc_pr_upper_per_sample(table: &PatternTable) -> Result<f64> {
    table.require_both_classes()?;
    let counts = table.counts();
    let fractions: Vec<f64> = optimal_order(&counts)
        .into_iter()
        .flat_map(|i| std::iter::repeat_n(counts[i].p_plus(), counts[i].total() as usize))
        .collect();
    let mut cumulative = 0.0;
    let mut prev_mean = fractions[0];
    let mut area = 0.0;
    for (i, &p) in fractions.iter().enumerate() {
        cumulative += p;
        let mean = cumulative / (i + 1) as f64;
        area += p / (2.0 * table.n_plus() as f64) * (prev_mean + mean);
        prev_mean = mean;
    }
    Ok(area)
}

/// Best accuracy of any classifier, as the fraction `Σ max{pos, neg} / m`.
pub fn accuracy_upper_exact(table: &PatternTable) -> Result<Ratio<u128>> {
    table.require_nonempty()?;
    let best: u64 = table.entries().map(|(_, c)| c.max()).sum();
    Ok(Ratio::new(u128::from(best), u128::from(table.m())))
}

pub fn accuracy_upper(table: &PatternTable) -> Result<f64> {
    table.require_nonempty()?;
    let best: u64 = table.entries().map(|(_, c)| c.max()).sum();
    Ok(best as f64 / table.m() as f64)
}

/// Minimum hinge loss as the fraction `Σ min{pos, neg} / m`.
pub fn min_hinge_exact(table: &PatternTable) -> Result<Ratio<u128>> {
    table.require_nonempty()?;
    let worst: u64 = table.entries().map(|(_, c)| c.min()).sum();
    Ok(Ratio::new(u128::from(worst), u128::from(table.m())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Square,
    Hinge,
    Softmax,
}

/// Minimum average loss over all real-valued classifiers.
///
/// The hinge value is computed as `1 - accuracy_upper`, which is exact in floating point
/// because the accuracy bound is at least one half; the two therefore add to exactly 1.
pub fn min_loss(table: &PatternTable, kind: LossKind) -> Result<f64> {
    table.require_nonempty()?;
    let m = table.m() as f64;
    Ok(match kind {
        LossKind::Hinge => 1.0 - accuracy_upper(table)?,
        LossKind::Square => {
            let s: f64 = table
                .entries()
                .map(|(_, c)| (c.pos as f64 * c.neg as f64) / c.total() as f64)
                .sum();
            4.0 * s / m
        }
        LossKind::Softmax => {
            let xlnx = |k: u64, total: u64| {
                if k == 0 {
                    0.0
                } else {
                    -(k as f64) * (k as f64 / total as f64).ln()
                }
            };
            let s: f64 = table
                .entries()
                .map(|(_, c)| xlnx(c.pos, c.total()) + xlnx(c.neg, c.total()))
                .sum();
            s / m
        }
    })
}

/// Optimal real-valued score of one pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternScore {
    pub pattern: Pattern,
    pub p_plus: f64,
    /// `2 p_plus - 1`, i.e. `(pos - neg) / (pos + neg)`.
    pub f_star: f64,
    pub weight: u64,
}

impl PatternScore {
    /// Sign of the optimal score; zero maps to positive.
    pub fn label(&self) -> Label {
        if self.f_star >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// Scores in descending positive-fraction order (ties in canonical pattern order).
pub fn optimal_scores(table: &PatternTable) -> Result<Vec<PatternScore>> {
    table.require_nonempty()?;
    let entries: Vec<(&Pattern, &Counts)> = table.entries().collect();
    let counts: Vec<Counts> = entries.iter().map(|(_, c)| **c).collect();
    Ok(optimal_order(&counts)
        .into_iter()
        .map(|i| {
            let (pattern, c) = entries[i];
            let p_plus = c.p_plus();
            PatternScore {
                pattern: pattern.clone(),
                p_plus,
                f_star: 2.0 * p_plus - 1.0,
                weight: c.total(),
            }
        })
        .collect())
}

/// All ceilings of one table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub ar_upper: f64,
    pub ap_upper: f64,
    pub ac_upper: f64,
    pub min_square: f64,
    pub min_hinge: f64,
    pub min_softmax: f64,
    pub overlap: f64,
    pub n_plus: u64,
    pub n_minus: u64,
    pub m: u64,
    pub d: usize,
}

pub fn bounds_report(table: &PatternTable) -> Result<BoundsReport> {
    table.require_both_classes()?;
    Ok(BoundsReport {
        ar_upper: auc_roc_upper(table)?,
        ap_upper: auc_pr_upper(table)?,
        ac_upper: accuracy_upper(table)?,
        min_square: min_loss(table, LossKind::Square)?,
        min_hinge: min_loss(table, LossKind::Hinge)?,
        min_softmax: min_loss(table, LossKind::Softmax)?,
        overlap: crate::overlap::overlap_index(table)?,
        n_plus: table.n_plus(),
        n_minus: table.n_minus(),
        m: table.m(),
        d: table.d(),
    })
}

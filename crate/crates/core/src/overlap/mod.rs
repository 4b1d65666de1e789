//! Jensen–Shannon class overlap and the feasible region of (overlap, AUC-ROC bound) pairs.

mod optimize;

use serde::{Deserialize, Serialize};

use crate::dataset::PatternTable;
use crate::error::{Error, Result};

pub use optimize::{ar_max_numeric, ar_max_search, MaxSearch, OptimizerConfig};

const SIMPLEX_TOL: f64 = 1e-12;

/// Normalized positive and negative distributions over a shared set of patterns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionPair {
    p_hat: Vec<f64>,
    n_hat: Vec<f64>,
}

impl DistributionPair {
    pub fn new(p_hat: Vec<f64>, n_hat: Vec<f64>) -> Result<Self> {
        if p_hat.is_empty() || p_hat.len() != n_hat.len() {
            return Err(Error::InvalidParameter(format!(
                "distributions have lengths {} and {}",
                p_hat.len(),
                n_hat.len()
            )));
        }
        for (name, v) in [("p_hat", &p_hat), ("n_hat", &n_hat)] {
            if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} has a negative or non-finite entry"
                )));
            }
            let s: f64 = v.iter().sum();
            if (s - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::InvalidParameter(format!("{name} sums to {s}")));
            }
        }
        Ok(DistributionPair { p_hat, n_hat })
    }

    /// Normalizes both weight vectors to the simplex.
    pub fn from_weights(p: &[f64], n: &[f64]) -> Result<Self> {
        let norm = |v: &[f64]| {
            let s: f64 = v.iter().sum();
            v.iter().map(|x| x / s).collect::<Vec<_>>()
        };
        Self::new(norm(p), norm(n))
    }

    pub fn from_table(table: &PatternTable) -> Result<Self> {
        table.require_both_classes()?;
        let (np, nn) = (table.n_plus() as f64, table.n_minus() as f64);
        let (p, n) = table
            .entries()
            .map(|(_, c)| (c.pos as f64 / np, c.neg as f64 / nn))
            .unzip();
        Ok(DistributionPair { p_hat: p, n_hat: n })
    }

    pub fn p_hat(&self) -> &[f64] {
        &self.p_hat
    }

    pub fn n_hat(&self) -> &[f64] {
        &self.n_hat
    }

    pub fn len(&self) -> usize {
        self.p_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_hat.is_empty()
    }

    pub fn swapped(&self) -> Self {
        DistributionPair {
            p_hat: self.n_hat.clone(),
            n_hat: self.p_hat.clone(),
        }
    }

    pub fn overlap(&self) -> f64 {
        overlap_of(&self.p_hat, &self.n_hat)
    }

    pub fn ar_upper(&self) -> f64 {
        ar_upper_of(&self.p_hat, &self.n_hat)
    }
}

/// `x log2(x / (x + y))` with `0 log 0 = 0`.
fn xlog_share(x: f64, y: f64) -> f64 {
    if x > 0.0 {
        x * (x / (x + y)).log2()
    } else {
        0.0
    }
}

/// `-1/2 Σ [p log2(p/(p+n)) + n log2(n/(p+n))]`, which is `1 - JS(p, n)`; clamped to `[0, 1]`.
pub(crate) fn overlap_of(p: &[f64], n: &[f64]) -> f64 {
    let s: f64 = p
        .iter()
        .zip(n)
        .map(|(&a, &b)| xlog_share(a, b) + xlog_share(b, a))
        .sum();
    // adding zero turns -0.0 into 0.0
    (-0.5 * s).clamp(0.0, 1.0) + 0.0
}

/// Overlap index of a table's normalized class distributions.
pub fn overlap_index(table: &PatternTable) -> Result<f64> {
    Ok(DistributionPair::from_table(table)?.overlap())
}

pub fn overlap_index_pair(pair: &DistributionPair) -> f64 {
    pair.overlap()
}

/// Sort order by descending likelihood ratio `p / n`, compared by cross-multiplication.
pub(crate) fn ratio_order(p: &[f64], n: &[f64], idx: &mut Vec<usize>) {
    idx.clear();
    idx.extend(0..p.len());
    idx.sort_by(|&i, &j| (p[j] * n[i]).total_cmp(&(p[i] * n[j])));
}

pub(crate) fn ar_upper_of(p: &[f64], n: &[f64]) -> f64 {
    let mut idx = Vec::with_capacity(p.len());
    ratio_order(p, n, &mut idx);
    let (mut before, mut acc) = (0.0, 0.0);
    for &i in &idx {
        acc += before * n[i] + 0.5 * p[i] * n[i];
        before += p[i];
    }
    acc
}

/// `1/2 Σ_{i,j} max{p_i n_j, p_j n_i}`, evaluated by sorting on the likelihood ratio.
pub fn ar_upper_of_distributions(pair: &DistributionPair) -> f64 {
    pair.ar_upper()
}

/// Overlap of the extremal family `p = (1 - b, b)`, `n = (0, 1)`.
pub fn heuristic_overlap(b: f64) -> f64 {
    let xlog2 = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    -0.5 * (xlog2(b) - xlog2(b + 1.0))
}

/// Smallest AUC-ROC bound compatible with overlap `d_s`: `1 - b/2` where the family above
/// reaches overlap `d_s`. Endpoints are exact.
pub fn ar_min_heuristic(d_s: f64) -> f64 {
    if d_s <= 0.0 {
        return 1.0;
    }
    if d_s >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if heuristic_overlap(mid) < d_s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    1.0 - 0.25 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSample {
    pub d_s: f64,
    pub ar_min: f64,
    pub ar_max: f64,
}

/// Sampled lower and upper curves of the AUC-ROC bound against overlap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapEnvelope {
    pub samples: Vec<EnvelopeSample>,
    /// Pattern count used by the maximization.
    pub m_used: usize,
    /// Indices `i` where `ar_max` rose from sample `i - 1` to `i`; left unrepaired.
    pub non_monotone: Vec<usize>,
}

/// Evaluates both curves on `grid`, which must be sorted and inside `(0, 1)`.
pub fn envelope(grid: &[f64], d: usize, config: &OptimizerConfig) -> Result<OverlapEnvelope> {
    if grid.iter().any(|&g| !(g > 0.0 && g < 1.0)) {
        return Err(Error::InvalidParameter(
            "grid values must lie in (0, 1)".into(),
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "grid must be strictly increasing".into(),
        ));
    }
    let samples = grid
        .iter()
        .map(|&d_s| {
            Ok(EnvelopeSample {
                d_s,
                ar_min: ar_min_heuristic(d_s),
                ar_max: ar_max_numeric(d_s, d, config)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let non_monotone: Vec<usize> = (1..samples.len())
        .filter(|&i| samples[i].ar_max > samples[i - 1].ar_max)
        .collect();
    for &i in &non_monotone {
        log::warn!(
            "ar_max rises from {} to {} between overlap {} and {}",
            samples[i - 1].ar_max,
            samples[i].ar_max,
            samples[i - 1].d_s,
            samples[i].d_s
        );
    }
    Ok(OverlapEnvelope {
        samples,
        m_used: d,
        non_monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t1() -> PatternTable {
        PatternTable::from_counts([("a", 2, 1), ("b", 1, 2)])
    }

    fn pair(p: &[f64], n: &[f64]) -> DistributionPair {
        DistributionPair::new(p.to_vec(), n.to_vec()).unwrap()
    }

    /// `1 - JS` through the mixture and Kullback–Leibler divergences.
    fn overlap_via_kl(p: &[f64], n: &[f64]) -> f64 {
        let kl = |a: &[f64], b: &[f64]| -> f64 {
            a.iter()
                .zip(b)
                .filter(|(x, _)| **x > 0.0)
                .map(|(x, y)| x * (x / y).log2())
                .sum()
        };
        let mix: Vec<f64> = p.iter().zip(n).map(|(a, b)| 0.5 * (a + b)).collect();
        1.0 - 0.5 * kl(p, &mix) - 0.5 * kl(n, &mix)
    }

    fn ar_pairwise(p: &[f64], n: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..p.len() {
            for j in 0..p.len() {
                s += (p[i] * n[j]).max(p[j] * n[i]);
            }
        }
        0.5 * s
    }

    #[test]
    fn overlap_examples() {
        let sep = pair(&[1.0, 0.0], &[0.0, 1.0]).overlap();
        assert!(sep == 0.0 && sep.is_sign_positive());
        assert_eq!(pair(&[0.25, 0.75], &[0.25, 0.75]).overlap(), 1.0);
        let t = overlap_index(&t1()).unwrap();
        assert!((t - 0.918_295_834_054_489_6).abs() < 1e-12);
        let (p, n) = ([2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]);
        assert!((overlap_via_kl(&p, &n) - t).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        let t = PatternTable::from_counts([("a", 2, 0)]);
        assert!(overlap_index(&t).is_err());
    }

    #[test]
    fn ar_of_distributions_examples() {
        assert!((pair(&[0.3, 0.7], &[0.3, 0.7]).ar_upper() - 0.5).abs() < 1e-15);
        assert_eq!(pair(&[1.0, 0.0], &[0.0, 1.0]).ar_upper(), 1.0);
        let t = DistributionPair::from_table(&t1()).unwrap();
        assert!((t.ar_upper() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pair_validation() {
        assert!(DistributionPair::new(vec![0.5, 0.5], vec![1.0]).is_err());
        assert!(DistributionPair::new(vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(DistributionPair::new(vec![1.5, -0.5], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn heuristic_examples() {
        assert_eq!(ar_min_heuristic(0.0), 1.0);
        assert_eq!(ar_min_heuristic(1.0), 0.5);
        assert!((heuristic_overlap(0.5) - 0.688_721_875_540_867).abs() < 1e-12);
        assert!((ar_min_heuristic(0.688721) - 0.75).abs() < 1e-6);
        assert!((ar_min_heuristic(heuristic_overlap(0.5)) - 0.75).abs() < 1e-10);
    }

    #[test]
    fn heuristic_is_attained_by_its_family() {
        for b in [0.05, 0.3, 0.8] {
            let pr = pair(&[1.0 - b, b], &[0.0, 1.0]);
            assert!((pr.overlap() - heuristic_overlap(b)).abs() < 1e-12);
            assert!((pr.ar_upper() - (1.0 - b / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_rejects_bad_grids() {
        let cfg = OptimizerConfig::default();
        assert!(envelope(&[0.0, 0.5], 4, &cfg).is_err());
        assert!(envelope(&[0.6, 0.5], 4, &cfg).is_err());
    }

    fn arb_pair() -> impl Strategy<Value = DistributionPair> {
        (2usize..8)
            .prop_flat_map(|d| {
                (
                    prop::collection::vec(0.0f64..1.0, d),
                    prop::collection::vec(0.0f64..1.0, d),
                )
            })
            .prop_filter("nonzero mass", |(p, n)| {
                p.iter().sum::<f64>() > 1e-3 && n.iter().sum::<f64>() > 1e-3
            })
            .prop_map(|(p, n)| DistributionPair::from_weights(&p, &n).unwrap())
    }

    proptest! {
        #[test]
        fn closed_forms_agree(pr in arb_pair()) {
            let a = pr.overlap();
            let b = overlap_via_kl(pr.p_hat(), pr.n_hat());
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
            let ar = pr.ar_upper();
            prop_assert!((ar - ar_pairwise(pr.p_hat(), pr.n_hat())).abs() < 1e-12);
            prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&ar));
        }

        #[test]
        fn symmetric_and_permutation_invariant(pr in arb_pair(), rot in 0usize..8) {
            prop_assert_eq!(pr.overlap(), pr.swapped().overlap());
            let k = rot % pr.len();
            let mut p = pr.p_hat().to_vec();
            let mut n = pr.n_hat().to_vec();
            p.rotate_left(k);
            n.rotate_left(k);
            let rotated = DistributionPair::new(p, n).unwrap();
            prop_assert!((rotated.overlap() - pr.overlap()).abs() < 1e-14);
        }

        #[test]
        fn heuristic_inverts_forward_map(b in 0.0f64..1.0) {
            let d = heuristic_overlap(b);
            prop_assert!((ar_min_heuristic(d) - (1.0 - b / 2.0)).abs() < 1e-9);
        }
    }
}

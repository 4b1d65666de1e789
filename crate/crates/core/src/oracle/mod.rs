//! Brute-force references for the closed forms.
//!
//! Nothing here calls into `bounds` or `splits`: orderings, labelings and splits are
//! enumerated and scored with their own pair counting and curve integration.

use itertools::Itertools;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Counts, Pattern, PatternTable};
use crate::error::{Error, Result};
use crate::splits::SplitTable;

mod suite;

pub use suite::{run_suite, CheckOutcome, SuiteConfig};

/// Enumeration limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    /// Largest `d` for `d!` orderings.
    pub max_patterns_ordering: usize,
    /// Largest `d` for `2^d` labelings.
    pub max_patterns_labeling: usize,
    /// Largest number of train/test assignments enumerated by [`brute_expected`].
    pub max_outcomes: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_patterns_ordering: 8,
            max_patterns_labeling: 12,
            max_outcomes: 1 << 20,
        }
    }
}

fn rows(table: &PatternTable) -> (Vec<Pattern>, Vec<(u64, u64)>) {
    table
        .entries()
        .map(|(p, c)| (p.clone(), (c.pos, c.neg)))
        .unzip()
}

fn need_both(table: &PatternTable) -> Result<()> {
    let (np, nn) = (table.n_plus(), table.n_minus());
    if np == 0 || nn == 0 {
        return Err(Error::SingleClass {
            n_plus: np,
            n_minus: nn,
        });
    }
    Ok(())
}

fn ordering_budget(d: usize, budget: &OracleBudget) -> Result<()> {
    if d > budget.max_patterns_ordering {
        return Err(Error::BudgetExceeded(format!(
            "{d}! orderings (d = {d} > {})",
            budget.max_patterns_ordering
        )));
    }
    Ok(())
}

fn labeling_budget(d: usize, budget: &OracleBudget) -> Result<()> {
    if d > budget.max_patterns_labeling {
        return Err(Error::BudgetExceeded(format!(
            "2^{d} labelings (d = {d} > {})",
            budget.max_patterns_labeling
        )));
    }
    Ok(())
}

/// Every ordering of `0..d`, sharded on the first element; `score` is maximized and the
/// earliest ordering in lexicographic order wins ties.
fn best_ordering<T, F>(d: usize, score: F) -> (T, Vec<usize>)
where
    T: PartialOrd + Send + Copy,
    F: Fn(&[usize]) -> T + Sync,
{
    (0..d)
        .into_par_iter()
        .map(|first| {
            let rest: Vec<usize> = (0..d).filter(|&i| i != first).collect();
            let mut best: Option<(T, Vec<usize>)> = None;
            for tail in rest.iter().copied().permutations(rest.len()) {
                let mut order = Vec::with_capacity(d);
                order.push(first);
                order.extend(tail);
                let v = score(&order);
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, order));
                }
            }
            best.expect("at least one ordering")
        })
        .reduce_with(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .expect("d >= 1")
}

/// Largest AUC-ROC over all pattern orderings (first = highest score), and an ordering
/// attaining it.
pub fn brute_best_auc(
    table: &PatternTable,
    budget: &OracleBudget,
) -> Result<(Ratio<u128>, Vec<Pattern>)> {
    need_both(table)?;
    let (patterns, c) = rows(table);
    ordering_budget(c.len(), budget)?;
    // doubled count of (positive, negative) pairs with the positive ranked higher, ties 1/2
    let doubled = |order: &[usize]| -> u128 {
        let mut acc = 0u128;
        for (a, &i) in order.iter().enumerate() {
            acc += u128::from(c[i].0) * u128::from(c[i].1);
            for &j in &order[a + 1..] {
                acc += 2 * u128::from(c[i].0) * u128::from(c[j].1);
            }
        }
        acc
    };
    let (best, order) = best_ordering(c.len(), doubled);
    let pairs = 2 * u128::from(table.n_plus()) * u128::from(table.n_minus());
    Ok((
        Ratio::new(best, pairs),
        order.into_iter().map(|i| patterns[i].clone()).collect(),
    ))
}

/// Area under the expected PR curve of one ordering. Every sample of a group carries the
/// group's positive fraction; the curve starts at recall 0 with the first group's fraction.
fn pr_area(c: &[(u64, u64)], order: &[usize], n_plus: u64) -> f64 {
    let n_plus = n_plus as f64;
    let first = c[order[0]];
    let mut prev = (0.0, first.0 as f64 / (first.0 + first.1) as f64);
    let (mut tp, mut seen) = (0.0f64, 0u64);
    let mut area = 0.0;
    for &i in order {
        let (pos, neg) = c[i];
        let size = pos + neg;
        for t in 1..=size {
            let expected_tp = tp + pos as f64 * t as f64 / size as f64;
            let point = (expected_tp / n_plus, expected_tp / (seen + t) as f64);
            area += (point.0 - prev.0) * (point.1 + prev.1) / 2.0;
            prev = point;
        }
        tp += pos as f64;
        seen += size;
    }
    area
}

/// Largest expected-PR area over all pattern orderings.
pub fn brute_best_pr_area(table: &PatternTable, budget: &OracleBudget) -> Result<f64> {
    need_both(table)?;
    let (_, c) = rows(table);
    ordering_budget(c.len(), budget)?;
    let n_plus = table.n_plus();
    Ok(best_ordering(c.len(), |o| pr_area(&c, o, n_plus)).0)
}

/// `f(labeling)` for every bitmask (bit `i` set = pattern `i` labeled positive), reduced
/// with `pick`.
fn scan_labelings<F, P>(d: usize, f: F, pick: P) -> u64
where
    F: Fn(u64) -> u64 + Sync,
    P: Fn(u64, u64) -> u64 + Sync + Send,
{
    (0..1u64 << d)
        .into_par_iter()
        .map(&f)
        .reduce_with(&pick)
        .expect("at least one labeling")
}

fn errors(c: &[(u64, u64)], mask: u64) -> u64 {
    c.iter()
        .enumerate()
        .map(|(i, &(pos, neg))| if mask >> i & 1 == 1 { neg } else { pos })
        .sum()
}

/// Best accuracy over all ±1 labelings of patterns.
pub fn brute_best_accuracy(table: &PatternTable, budget: &OracleBudget) -> Result<Ratio<u128>> {
    if table.m() == 0 {
        return Err(Error::EmptyTable);
    }
    let (_, c) = rows(table);
    labeling_budget(c.len(), budget)?;
    let fewest = scan_labelings(c.len(), |mask| errors(&c, mask), u64::min);
    Ok(Ratio::new(
        u128::from(table.m() - fewest),
        u128::from(table.m()),
    ))
}

/// Smallest hinge loss over all ±1 labelings, halved so that a wrong label costs 1:
/// `min_f (1 / 2m) Σ max{0, 1 - y f(x)}`.
pub fn brute_min_hinge(table: &PatternTable, budget: &OracleBudget) -> Result<Ratio<u128>> {
    if table.m() == 0 {
        return Err(Error::EmptyTable);
    }
    let (_, c) = rows(table);
    labeling_budget(c.len(), budget)?;
    let hinge = |mask: u64| -> u64 {
        c.iter()
            .enumerate()
            .map(|(i, &(pos, neg))| {
                let f: i64 = if mask >> i & 1 == 1 { 1 } else { -1 };
                let loss = |y: i64| (1 - y * f).max(0) as u64;
                pos * loss(1) + neg * loss(-1)
            })
            .sum()
    };
    let least = scan_labelings(c.len(), hinge, u64::min);
    Ok(Ratio::new(u128::from(least), 2 * u128::from(table.m())))
}

/// Smallest training-error excess plus test-error excess over all labelings, each excess
/// measured against that side's own best labeling, divided by the total sample count.
pub fn brute_min_delta(split: &SplitTable, budget: &OracleBudget) -> Result<Ratio<u128>> {
    let train: Vec<(u64, u64)> = split
        .entries()
        .iter()
        .map(|e| (e.train.pos, e.train.neg))
        .collect();
    let test: Vec<(u64, u64)> = split
        .entries()
        .iter()
        .map(|e| (e.test.pos, e.test.neg))
        .collect();
    let d = train.len();
    labeling_budget(d, budget)?;
    let m = split.m();
    if m == 0 {
        return Err(Error::EmptyTable);
    }
    let best_train = scan_labelings(d, |mask| errors(&train, mask), u64::min);
    let best_test = scan_labelings(d, |mask| errors(&test, mask), u64::min);
    let least = scan_labelings(
        d,
        |mask| (errors(&train, mask) - best_train) + (errors(&test, mask) - best_test),
        u64::min,
    );
    Ok(Ratio::new(u128::from(least), u128::from(m)))
}

/// Expected split quantities, all normalized the way the closed forms are: training minimum
/// hinge by `m p`, test accuracy by `m (1 - p)`, joint excess by `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitExpectations {
    pub min_hinge: f64,
    pub ac_upper: f64,
    pub delta: f64,
}

/// Per-split values for given train counts; test counts are the remainder.
fn split_values(c: &[(u64, u64)], train: &[(u64, u64)], m: f64, p: f64) -> [f64; 3] {
    let (mut hinge, mut acc, mut delta) = (0u64, 0u64, 0u64);
    for (&(pos, neg), &(tp, tn)) in c.iter().zip(train) {
        let (sp, sn) = (pos - tp, neg - tn);
        hinge += tp.min(tn);
        acc += sp.max(sn);
        delta += tp.max(tn) + sp.max(sn) - pos.max(neg);
    }
    [
        hinge as f64 / (m * p),
        acc as f64 / (m * (1.0 - p)),
        delta as f64 / m,
    ]
}

fn check_ratio(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split ratio {p} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Exact expectations by enumerating all `2^m` train/test assignments of individual samples.
pub fn brute_expected(
    table: &PatternTable,
    p: f64,
    budget: &OracleBudget,
) -> Result<SplitExpectations> {
    check_ratio(p)?;
    let m = table.m();
    if m == 0 {
        return Err(Error::EmptyTable);
    }
    if m >= 64 || 1u64 << m > budget.max_outcomes {
        return Err(Error::BudgetExceeded(format!("2^{m} split outcomes")));
    }
    let (_, c) = rows(table);
    // sample s belongs to pattern owner[s] and is positive when is_pos[s]
    let mut owner = Vec::new();
    let mut is_pos = Vec::new();
    for (i, &(pos, neg)) in c.iter().enumerate() {
        for k in 0..pos + neg {
            owner.push(i);
            is_pos.push(k < pos);
        }
    }
    let sums = (0..1u64 << m)
        .into_par_iter()
        .map(|mask| {
            let mut train = vec![(0u64, 0u64); c.len()];
            for s in 0..m as usize {
                if mask >> s & 1 == 1 {
                    let slot = &mut train[owner[s]];
                    if is_pos[s] {
                        slot.0 += 1;
                    } else {
                        slot.1 += 1;
                    }
                }
            }
            let k = mask.count_ones() as i32;
            let weight = p.powi(k) * (1.0 - p).powi(m as i32 - k);
            split_values(&c, &train, m as f64, p).map(|v| v * weight)
        })
        .reduce(|| [0.0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    Ok(SplitExpectations {
        min_hinge: sums[0],
        ac_upper: sums[1],
        delta: sums[2],
    })
}

/// Sample mean and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// True when `value` lies within `k` standard errors, or within `floor` when the
    /// estimate has no spread.
    pub fn covers(&self, value: f64, k: f64, floor: f64) -> bool {
        (self.mean - value).abs() <= (k * self.std_error).max(floor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McExpectations {
    pub min_hinge: Estimate,
    pub ac_upper: Estimate,
    pub delta: Estimate,
    pub trials: u64,
}

const MC_BLOCK: u64 = 1000;

/// Monte Carlo estimates: every sample independently joins the training side with
/// probability `p`. Trials run in fixed blocks with their own random stream, so results do
/// not depend on the thread count.
pub fn mc_expected(table: &PatternTable, p: f64, trials: u64, seed: u64) -> Result<McExpectations> {
    check_ratio(p)?;
    if trials < 1000 {
        return Err(Error::InvalidParameter(format!(
            "{trials} trials; at least 1000 required"
        )));
    }
    let m = table.m();
    if m == 0 {
        return Err(Error::EmptyTable);
    }
    let (_, c) = rows(table);
    let blocks = trials.div_ceil(MC_BLOCK);
    let moments = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let n = MC_BLOCK.min(trials - b * MC_BLOCK);
            let mut acc = [[0.0f64; 2]; 3];
            let mut train = vec![(0u64, 0u64); c.len()];
            for _ in 0..n {
                for (slot, &(pos, neg)) in train.iter_mut().zip(&c) {
                    *slot = (
                        (0..pos).filter(|_| rng.random_bool(p)).count() as u64,
                        (0..neg).filter(|_| rng.random_bool(p)).count() as u64,
                    );
                }
                for (a, v) in acc.iter_mut().zip(split_values(&c, &train, m as f64, p)) {
                    a[0] += v;
                    a[1] += v * v;
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold([[0.0f64; 2]; 3], |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x[0] += y[0];
                x[1] += y[1];
            }
            a
        });
    let n = trials as f64;
    let est = |[s, s2]: [f64; 2]| {
        let mean = s / n;
        let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
        Estimate {
            mean,
            std_error: (var / n).sqrt(),
        }
    };
    Ok(McExpectations {
        min_hinge: est(moments[0]),
        ac_upper: est(moments[1]),
        delta: est(moments[2]),
        trials,
    })
}

/// Random table with `1..=max_d` patterns and counts in `0..=max_count`, both classes present.
pub fn random_table<R: Rng>(rng: &mut R, max_d: usize, max_count: u64) -> PatternTable {
    loop {
        let d = rng.random_range(1..=max_d);
        let t = PatternTable::from_entries((0..d).map(|i| {
            (
                Pattern::new([format!("x{i}")]),
                Counts::new(
                    rng.random_range(0..=max_count),
                    rng.random_range(0..=max_count),
                ),
            )
        }));
        if t.n_plus() > 0 && t.n_minus() > 0 {
            return t;
        }
    }
}

/// Random train/test split table with `1..=max_d` patterns.
pub fn random_split<R: Rng>(rng: &mut R, max_d: usize, max_count: u64) -> SplitTable {
    loop {
        let d = rng.random_range(1..=max_d);
        let mut draw = || {
            Counts::new(
                rng.random_range(0..=max_count),
                rng.random_range(0..=max_count),
            )
        };
        let entries = (0..d)
            .map(|i| crate::splits::SplitEntry {
                pattern: Pattern::new([format!("x{i}")]),
                train: draw(),
                test: draw(),
            })
            .collect();
        let split = SplitTable::new(entries).expect("distinct patterns");
        if split.m() > 0 {
            return split;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t1() -> PatternTable {
        PatternTable::from_counts([("a", 2, 1), ("b", 1, 2)])
    }

    fn b() -> OracleBudget {
        OracleBudget::default()
    }

    fn pat(s: &str) -> Pattern {
        Pattern::new([s])
    }

    #[test]
    fn auc_examples() {
        assert_eq!(
            brute_best_auc(&t1(), &b()).unwrap(),
            (Ratio::new(2, 3), vec![pat("a"), pat("b")])
        );
        let sep = PatternTable::from_counts([("n", 0, 2), ("p", 3, 0)]);
        assert_eq!(
            brute_best_auc(&sep, &b()).unwrap(),
            (Ratio::from_integer(1), vec![pat("p"), pat("n")])
        );
        let tied = PatternTable::from_counts([("x", 2, 2)]);
        assert_eq!(
            brute_best_auc(&tied, &b()).unwrap(),
            (Ratio::new(1, 2), vec![pat("x")])
        );
    }

    #[test]
    fn labeling_examples() {
        assert_eq!(brute_best_accuracy(&t1(), &b()).unwrap(), Ratio::new(2, 3));
        assert_eq!(brute_min_hinge(&t1(), &b()).unwrap(), Ratio::new(1, 3));
        let sep = PatternTable::from_counts([("n", 0, 2), ("p", 3, 0)]);
        assert_eq!(
            brute_best_accuracy(&sep, &b()).unwrap(),
            Ratio::from_integer(1)
        );
        assert_eq!(brute_min_hinge(&sep, &b()).unwrap(), Ratio::from_integer(0));
        let tied = PatternTable::from_counts([("x", 2, 2), ("y", 1, 1), ("z", 3, 3)]);
        assert_eq!(brute_best_accuracy(&tied, &b()).unwrap(), Ratio::new(1, 2));
        assert_eq!(brute_min_hinge(&tied, &b()).unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn pr_examples() {
        assert!((brute_best_pr_area(&t1(), &b()).unwrap() - 19.0 / 30.0).abs() < 1e-15);
        let sep = PatternTable::from_counts([("n", 0, 2), ("p", 3, 0)]);
        assert_eq!(brute_best_pr_area(&sep, &b()).unwrap(), 1.0);
        let tied = PatternTable::from_counts([("x", 3, 3)]);
        assert_eq!(brute_best_pr_area(&tied, &b()).unwrap(), 0.5);
    }

    #[test]
    fn delta_examples() {
        let e = |train: (u64, u64), test: (u64, u64)| crate::splits::SplitEntry {
            pattern: pat("x"),
            train: Counts::new(train.0, train.1),
            test: Counts::new(test.0, test.1),
        };
        let one = SplitTable::new(vec![e((2, 0), (0, 1))]).unwrap();
        assert_eq!(brute_min_delta(&one, &b()).unwrap(), Ratio::new(1, 3));
        let consistent = SplitTable::new(vec![e((3, 1), (2, 0))]).unwrap();
        assert_eq!(
            brute_min_delta(&consistent, &b()).unwrap(),
            Ratio::from_integer(0)
        );
    }

    #[test]
    fn budgets_are_enforced() {
        let wide = PatternTable::from_counts((0..9).map(|i| (format!("p{i}"), 1, 1)));
        assert!(matches!(
            brute_best_auc(&wide, &b()),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(matches!(
            brute_best_pr_area(&wide, &b()),
            Err(Error::BudgetExceeded(_))
        ));
        let wider = PatternTable::from_counts((0..13).map(|i| (format!("p{i}"), 1, 1)));
        assert!(matches!(
            brute_best_accuracy(&wider, &b()),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(matches!(
            brute_expected(&wider, 0.5, &b()),
            Err(Error::BudgetExceeded(_))
        ));
        let single = PatternTable::from_counts([("a", 3, 0)]);
        assert!(matches!(
            brute_best_auc(&single, &b()),
            Err(Error::SingleClass { .. })
        ));
    }

    #[test]
    fn exhaustive_expectation_of_tied_pair() {
        let t = PatternTable::from_counts([("x", 1, 1)]);
        let e = brute_expected(&t, 0.5, &b()).unwrap();
        assert_eq!((e.min_hinge, e.ac_upper, e.delta), (0.25, 0.75, 0.25));
    }

    #[test]
    fn mc_examples() {
        let sep = PatternTable::from_counts([("n", 0, 2), ("p", 3, 0)]);
        let e = mc_expected(&sep, 0.3, 1000, 1).unwrap();
        assert_eq!((e.min_hinge.mean, e.delta.mean), (0.0, 0.0));
        assert!((e.ac_upper.mean - 1.0).abs() < 0.05);
        assert!(mc_expected(&sep, 0.3, 999, 1).is_err());
        assert!(mc_expected(&sep, 1.0, 1000, 1).is_err());

        let t = PatternTable::from_counts([("x", 1, 1)]);
        let e = mc_expected(&t, 0.5, 100_000, 9).unwrap();
        assert!(e.delta.covers(0.25, 3.0, 0.0), "{e:?}");
        assert_eq!(e, mc_expected(&t, 0.5, 100_000, 9).unwrap());
    }

    #[test]
    fn mc_error_shrinks_with_trials() {
        let t = PatternTable::from_counts([("a", 3, 2), ("b", 1, 4)]);
        let small = mc_expected(&t, 0.4, 4000, 3).unwrap();
        let large = mc_expected(&t, 0.4, 16_000, 3).unwrap();
        let ratio = small.delta.std_error / large.delta.std_error;
        assert!((1.7..2.3).contains(&ratio), "{ratio}");
    }
}

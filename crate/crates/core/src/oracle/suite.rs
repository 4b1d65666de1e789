use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    brute_best_accuracy, brute_best_auc, brute_best_pr_area, brute_expected, brute_min_delta,
    brute_min_hinge, mc_expected, random_split, random_table, OracleBudget,
};
use crate::bounds::{
    accuracy_upper, accuracy_upper_exact, auc_pr_upper, auc_roc_upper_exact, min_hinge_exact,
    min_loss, LossKind,
};
use crate::error::Result;
use crate::splits::{
    delta_lower_bound, expected_accuracy_upper, expected_delta, expected_min_hinge,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    /// Random tables per property.
    pub cases: usize,
    /// Monte Carlo trials per (table, ratio) pair.
    pub trials: u64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            cases: 200,
            trials: 100_000,
            seed: 0,
        }
    }
}

/// Outcome of one property over all its cases.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub property: String,
    pub cases: usize,
    pub failures: usize,
    /// First failing case, if any.
    pub detail: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    outcome: CheckOutcome,
}

impl Tally {
    fn new(property: &str) -> Self {
        Tally {
            outcome: CheckOutcome {
                property: property.to_owned(),
                cases: 0,
                failures: 0,
                detail: None,
            },
        }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.outcome.cases += 1;
        if !ok {
            self.outcome.failures += 1;
            if self.outcome.detail.is_none() {
                self.outcome.detail = Some(detail());
            }
        }
    }
}

const MC_TABLES: usize = 4;
const MC_RATIOS: [f64; 3] = [0.2, 0.5, 0.7];
const MC_SIGMAS: f64 = 3.0;

/// Compares every closed form with its brute-force reference on seeded random instances.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<CheckOutcome>> {
    let budget = OracleBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut roc = Tally::new("auc_roc_upper equals best ordering (exact)");
    let mut pr = Tally::new("auc_pr_upper equals best ordering (1e-12)");
    let mut acc = Tally::new("accuracy_upper equals best labeling (exact)");
    let mut hinge = Tally::new("min_hinge equals best labeling (exact)");
    let mut complement = Tally::new("accuracy_upper + min_hinge = 1 (exact)");
    for _ in 0..config.cases {
        let t = random_table(&mut rng, 6, 4);
        let (brute, _) = brute_best_auc(&t, &budget)?;
        let closed = auc_roc_upper_exact(&t)?;
        roc.record(closed == brute, || format!("{t:?}: {closed} vs {brute}"));
        let (closed, brute) = (auc_pr_upper(&t)?, brute_best_pr_area(&t, &budget)?);
        pr.record((closed - brute).abs() <= 1e-12, || {
            format!("{t:?}: {closed} vs {brute}")
        });
        let (closed, brute) = (accuracy_upper_exact(&t)?, brute_best_accuracy(&t, &budget)?);
        acc.record(closed == brute, || format!("{t:?}: {closed} vs {brute}"));
        let (closed, brute) = (min_hinge_exact(&t)?, brute_min_hinge(&t, &budget)?);
        hinge.record(closed == brute, || format!("{t:?}: {closed} vs {brute}"));
        let sum = accuracy_upper(&t)? + min_loss(&t, LossKind::Hinge)?;
        complement.record(sum == 1.0, || format!("{t:?}: sum {sum}"));
    }

    let mut delta = Tally::new("delta_lower_bound equals best labeling (exact)");
    for _ in 0..config.cases {
        let s = random_split(&mut rng, 10, 4);
        let report = delta_lower_bound(&s);
        let brute = brute_min_delta(&s, &budget)?;
        let closed = num_rational::Ratio::new(u128::from(report.delta_raw), u128::from(report.m));
        delta.record(closed == brute, || format!("{s:?}: {closed} vs {brute}"));
    }

    let mut exact = Tally::new("split expectations equal full enumeration (1e-12)");
    for _ in 0..config.cases.min(50) {
        let t = loop {
            let t = random_table(&mut rng, 4, 3);
            if t.m() <= 14 {
                break t;
            }
        };
        let p = rng.random_range(0.05..0.95);
        let e = brute_expected(&t, p, &budget)?;
        let got = [
            expected_min_hinge(&t, p)?,
            expected_accuracy_upper(&t, p)?,
            expected_delta(&t, p)?,
        ];
        let want = [e.min_hinge, e.ac_upper, e.delta];
        let ok = got.iter().zip(&want).all(|(a, b)| (a - b).abs() <= 1e-12);
        exact.record(ok, || format!("{t:?}, p = {p}: {got:?} vs {want:?}"));
    }

    let mut mc = Tally::new("split expectations within 3 s.e. of Monte Carlo");
    for i in 0..MC_TABLES {
        let t = random_table(&mut rng, 6, 4);
        for (j, &p) in MC_RATIOS.iter().enumerate() {
            let est = mc_expected(
                &t,
                p,
                config.trials,
                config.seed ^ ((i * 16 + j) as u64 + 1),
            )?;
            let pairs = [
                (est.min_hinge, expected_min_hinge(&t, p)?),
                (est.ac_upper, expected_accuracy_upper(&t, p)?),
                (est.delta, expected_delta(&t, p)?),
            ];
            for (e, v) in pairs {
                mc.record(e.covers(v, MC_SIGMAS, 1e-12), || {
                    format!("{t:?}, p = {p}: {e:?} vs {v}")
                });
            }
        }
    }

    Ok([roc, pr, acc, hinge, complement, delta, exact, mc]
        .into_iter()
        .map(|t| t.outcome)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let outcomes = run_suite(&SuiteConfig {
            cases: 30,
            trials: 2000,
            seed: 11,
        })
        .unwrap();
        assert_eq!(outcomes.len(), 8);
        for o in &outcomes[..7] {
            assert!(o.passed(), "{o:?}");
            assert!(o.cases > 0);
        }
    }
}

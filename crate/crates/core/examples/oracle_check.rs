//! Brute force against closed forms, on a handful of instances and then the full suite.

use predictability::bounds::{auc_pr_upper, auc_roc_upper_exact};
use predictability::dataset::PatternTable;
use predictability::oracle::{
    brute_best_auc, brute_best_pr_area, run_suite, OracleBudget, SuiteConfig,
};

fn main() -> predictability::Result<()> {
    let table = PatternTable::from_counts([("a", 2, 1), ("b", 1, 2), ("c", 3, 0)]);
    let (auc, order) = brute_best_auc(&table, &OracleBudget::default())?;
    let names: Vec<String> = order.iter().map(ToString::to_string).collect();
    println!(
        "best of 3! orderings: {auc} via {names:?}; closed form {}",
        auc_roc_upper_exact(&table)?
    );
    println!(
        "PR area: brute force {:.15}, closed form {:.15}",
        brute_best_pr_area(&table, &OracleBudget::default())?,
        auc_pr_upper(&table)?
    );

    for outcome in run_suite(&SuiteConfig {
        cases: 100,
        trials: 20_000,
        seed: 3,
    })? {
        let status = if outcome.passed() { "PASS" } else { "FAIL" };
        println!("{status}  {} ({} cases)", outcome.property, outcome.cases);
    }
    Ok(())
}

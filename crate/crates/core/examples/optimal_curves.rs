//! Writes the optimal ROC and PR vertices next to the system temp dir and prints both areas.

use predictability::bounds::{optimal_pr_curve, optimal_roc_curve};
use predictability::dataset::PatternTable;

fn main() -> predictability::Result<()> {
    let table = PatternTable::from_counts([("a", 8, 1), ("b", 5, 5), ("c", 2, 6), ("d", 0, 4)]);
    let roc = optimal_roc_curve(&table)?;
    let pr = optimal_pr_curve(&table)?;

    let dir = std::env::temp_dir();
    roc.write_csv(std::fs::File::create(dir.join("optimal_roc.csv"))?)?;
    pr.write_csv(std::fs::File::create(dir.join("optimal_pr.csv"))?)?;

    println!("ROC vertices:");
    for (fpr, tpr) in &roc.points {
        println!("  {fpr:.3} {tpr:.3}");
    }
    println!(
        "ROC area {:.6}, concave: {}",
        roc.area,
        roc.is_concave(1e-12)
    );
    // one PR vertex per sample, since precision is not linear in recall inside a pattern
    println!("PR area {:.6} over {} vertices", pr.area, pr.points.len());
    println!("CSV files in {}", dir.display());
    Ok(())
}

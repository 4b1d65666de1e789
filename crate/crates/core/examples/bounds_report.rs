//! Ceilings of a small pattern table, exact and in floating point.
//!
//! `cargo run --example bounds_report`

use predictability::bounds::{auc_roc_upper_exact, bounds_report, optimal_scores};
use predictability::dataset::PatternTable;

fn main() -> predictability::Result<()> {
    let table = PatternTable::from_counts([
        ("young|renter", 3, 9),
        ("young|owner", 4, 4),
        ("old|renter", 6, 2),
        ("old|owner", 11, 1),
    ]);

    let report = bounds_report(&table)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    println!(
        "AUC-ROC ceiling as a fraction: {}",
        auc_roc_upper_exact(&table)?
    );

    println!("\nscore each pattern like this to attain the ceilings:");
    for s in optimal_scores(&table)? {
        println!(
            "  {:<14} f* = {:+.3}  ({} samples)",
            s.pattern.to_string(),
            s.f_star,
            s.weight
        );
    }
    Ok(())
}

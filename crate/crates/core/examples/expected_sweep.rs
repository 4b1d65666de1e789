//! Expected split quantities against the training fraction, with one Monte Carlo spot check.

use predictability::dataset::PatternTable;
use predictability::oracle::mc_expected;
use predictability::splits::{expected_accuracy_upper, expected_delta, expected_min_hinge};

fn main() -> predictability::Result<()> {
    let table = PatternTable::from_counts([("a", 6, 2), ("b", 3, 3), ("c", 1, 5), ("d", 4, 0)]);
    println!("   p  min_hinge  ac_upper     delta");
    for k in 1..=9 {
        let p = f64::from(k) / 10.0;
        println!(
            "{p:.1}  {:9.5}  {:8.5}  {:8.5}",
            expected_min_hinge(&table, p)?,
            expected_accuracy_upper(&table, p)?,
            expected_delta(&table, p)?
        );
    }

    let mc = mc_expected(&table, 0.3, 50_000, 1)?;
    println!(
        "\nMonte Carlo at p = 0.3: delta {:.5} +- {:.5} (closed form {:.5})",
        mc.delta.mean,
        mc.delta.std_error,
        expected_delta(&table, 0.3)?
    );
    Ok(())
}

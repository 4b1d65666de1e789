//! Where a dataset sits between the lowest and highest AUC-ROC ceiling its overlap allows.

use predictability::bounds::auc_roc_upper;
use predictability::dataset::PatternTable;
use predictability::overlap::{ar_max_search, envelope, overlap_index, OptimizerConfig};

fn main() -> predictability::Result<()> {
    let config = OptimizerConfig::default();
    let grid: Vec<f64> = (1..10).map(|k| f64::from(k) / 10.0).collect();
    let env = envelope(&grid, 10, &config)?;
    println!("overlap  ar_min  ar_max");
    for s in &env.samples {
        println!("  {:.1}   {:.4}  {:.4}", s.d_s, s.ar_min, s.ar_max);
    }

    let table = PatternTable::from_counts([("a", 9, 2), ("b", 4, 4), ("c", 2, 7), ("d", 1, 3)]);
    let d_s = overlap_index(&table)?;
    let best = ar_max_search(d_s, 10, &config)?;
    println!(
        "\ntable: overlap {d_s:.4}, ar_upper {:.4}, ceiling at this overlap {:.4} (start {}, violation {:.1e})",
        auc_roc_upper(&table)?,
        best.value,
        best.start,
        best.violation
    );
    Ok(())
}

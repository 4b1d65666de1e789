//! Raw CSV -> binning -> pattern table -> bounds.
//!
//! Income is numeric and is cut into quantile bins; the rest stays categorical.

use std::path::Path;

use predictability::bounds::bounds_report;
use predictability::dataset::{build_pattern_table, discretize, load_csv, Binning, ColumnSchema};

fn main() -> predictability::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/loans.csv");
    let schema = [
        ColumnSchema::binned("income", Binning::Quantile(4)),
        ColumnSchema::categorical("region"),
        ColumnSchema::categorical("owner"),
        ColumnSchema::binned("tenure", Binning::EqualWidth(3)),
    ];
    let raw = load_csv(&path, "label", "approved", &schema)?;
    let data = discretize(&raw, &schema)?;

    let table = data.pattern_table()?;
    println!("{} samples, {} distinct patterns", table.m(), table.d());
    let mut out = Vec::new();
    table.write_csv(&mut out)?;
    print!("{}", String::from_utf8_lossy(&out));

    let all = bounds_report(&table)?;
    let income_only = bounds_report(&build_pattern_table(&data, &["income"])?)?;
    println!("all columns: ar {:.4} ac {:.4}", all.ar_upper, all.ac_upper);
    println!(
        "income only: ar {:.4} ac {:.4}",
        income_only.ar_upper, income_only.ac_upper
    );
    Ok(())
}

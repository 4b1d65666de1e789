//! Derived columns never move the ceilings: a column that is a function of existing ones
//! splits no pattern.

use predictability::bounds::bounds_report;
use predictability::dataset::{generate_synthetic_columns, Dataset, FeatureLaw};
use predictability::features::{augment_neighborhood, augment_transform, Aggregator, Metric};

fn show(name: &str, data: &Dataset) -> predictability::Result<()> {
    let r = bounds_report(&data.pattern_table()?)?;
    println!(
        "{name:<22} columns {}  ar {:.6}  ac {:.6}  overlap {:.6}",
        data.columns().len(),
        r.ar_upper,
        r.ac_upper,
        r.overlap
    );
    Ok(())
}

fn main() -> predictability::Result<()> {
    let laws = [
        FeatureLaw::Poisson { lambda: 1.5 },
        FeatureLaw::Poisson { lambda: 3.0 },
    ];
    let data = generate_synthetic_columns(&laws, 0.35, 1000, 2)?;
    show("original", &data)?;

    let summed = augment_transform(&data, &["x1", "x2"], "x1_plus_x2", |v| {
        let n: u64 = v.iter().map(|s| s.parse::<u64>().unwrap_or(0)).sum();
        n.to_string()
    })?;
    show("+ sum column", &summed)?;

    for r in [0.0, 1.0, 2.0] {
        let nb = augment_neighborhood(&data, r, Aggregator::Mean, Metric::Hamming)?;
        show(&format!("+ neighbor means r={r}"), &nb)?;
    }
    show(
        "+ neighbor count r=inf",
        &augment_neighborhood(&data, f64::INFINITY, Aggregator::Count, Metric::Hamming)?,
    )?;
    Ok(())
}

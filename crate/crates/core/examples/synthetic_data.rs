//! Labels drawn independently of the feature: the ceilings measure pure chance structure,
//! and they shrink toward 1/2 as the sample grows.

use predictability::bounds::bounds_report;
use predictability::dataset::{generate_synthetic, FeatureLaw};

fn main() -> predictability::Result<()> {
    let laws = [
        ("poisson(4)", FeatureLaw::Poisson { lambda: 4.0 }),
        (
            "gaussian/10 bins",
            FeatureLaw::Gaussian {
                mean: 0.0,
                std_dev: 1.0,
                bins: 10,
            },
        ),
        (
            "power-law(2.5)",
            FeatureLaw::PowerLaw {
                alpha: 2.5,
                support: 100,
            },
        ),
    ];
    for (name, law) in laws {
        print!("{name:<17}");
        for size in [100, 1_000, 10_000, 100_000] {
            let r = bounds_report(&generate_synthetic(law, 0.5, size, 9)?.pattern_table()?)?;
            print!("  m={size:<6} ar {:.4}", r.ar_upper);
        }
        println!();
    }
    Ok(())
}

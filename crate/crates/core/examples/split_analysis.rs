//! How much any classifier must lose to a particular train/test split.

use predictability::dataset::{generate_synthetic_columns, FeatureLaw};
use predictability::splits::{
    bound_attaining_labeling, delta_lower_bound, delta_of_classifier, split_random,
    train_optimal_labeling,
};

fn main() -> predictability::Result<()> {
    let laws = [
        FeatureLaw::Poisson { lambda: 2.0 },
        FeatureLaw::PowerLaw {
            alpha: 2.0,
            support: 6,
        },
    ];
    let data = generate_synthetic_columns(&laws, 0.4, 400, 7)?;
    let (_train, _test, split) = split_random(&data, 0.7, 42)?;

    let bound = delta_lower_bound(&split);
    println!(
        "{} train / {} test samples over {} patterns",
        split.train_size(),
        split.test_size(),
        split.d()
    );
    println!(
        "delta lower bound {:.4} ({} samples), perfect split: {}",
        bound.delta, bound.delta_raw, bound.perfect
    );

    // fitting the training side perfectly pays the whole excess on the test side
    let fit = delta_of_classifier(&split, &train_optimal_labeling(&split))?;
    let best = delta_of_classifier(&split, &bound_attaining_labeling(&split))?;
    println!(
        "train-optimal labeling: train gap {:.4}, test gap {:.4}",
        fit.delta_train, fit.delta_test
    );
    println!(
        "bound-attaining labeling: train gap {:.4}, test gap {:.4}",
        best.delta_train, best.delta_test
    );
    Ok(())
}

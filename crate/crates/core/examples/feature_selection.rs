//! Best subsets per size and the smallest size that keeps the full dataset's overlap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use predictability::dataset::{Column, Dataset, Label};
use predictability::features::{
    greedy_trace, optimal_dimension_kstar, SelectionMode, DEFAULT_BUDGET,
};

fn main() -> predictability::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows = 300;
    // two informative columns and four noise columns
    let signal: Vec<u32> = (0..rows).map(|_| rng.random_range(0..4)).collect();
    let helper: Vec<u32> = (0..rows).map(|_| rng.random_range(0..2)).collect();
    let labels: Vec<Label> = signal
        .iter()
        .zip(&helper)
        .map(|(&s, &h)| {
            let p = 0.15 + 0.2 * f64::from(s) + 0.1 * f64::from(h);
            if rng.random_bool(p) {
                Label::Positive
            } else {
                Label::Negative
            }
        })
        .collect();
    let text = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>();
    let mut columns = vec![
        Column::categorical("signal", &text(&signal)),
        Column::categorical("helper", &text(&helper)),
    ];
    for j in 0..4 {
        let noise: Vec<u32> = (0..rows).map(|_| rng.random_range(0..3)).collect();
        columns.push(Column::categorical(format!("noise{j}"), &text(&noise)));
    }
    let data = Dataset::new(columns, labels)?;

    let result = optimal_dimension_kstar(
        &data,
        SelectionMode::Exhaustive {
            budget: DEFAULT_BUDGET,
        },
        1e-12,
    )?;
    println!(" k  {:<44}  ar_upper  min overlap", "best subset");
    for level in &result.levels {
        println!(
            "{:2}  {:<44}  {:.4}    {:.4}",
            level.k,
            level.best.subset.join("|"),
            level.best.ar_upper,
            level.min_overlap.overlap
        );
    }
    // on a finite sample even noise columns split patterns, so the overlap keeps falling
    println!("k* = {} using {:?}", result.k_star, result.global_subset);

    println!("\ngreedy forward selection:");
    for s in greedy_trace(&data, 3)? {
        println!("  {:<28} ar_upper {:.4}", s.subset.join("|"), s.ar_upper);
    }
    Ok(())
}

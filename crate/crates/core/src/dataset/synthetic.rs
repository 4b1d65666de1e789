use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal, Poisson};

use super::{Column, Dataset, Label};
use crate::error::{Error, Result};

/// Marginal law of a synthetic integer-valued feature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeatureLaw {
    Poisson {
        lambda: f64,
    },
    /// Normal draws binned into `bins` equal-width bins over `mean ± 3 std_dev`, clamped at the ends.
    Gaussian {
        mean: f64,
        std_dev: f64,
        bins: u32,
    },
    /// `P(k) ∝ k^-alpha` on `1..=support`.
    PowerLaw {
        alpha: f64,
        support: u32,
    },
}

enum Sampler {
    Poisson(Poisson<f64>),
    Gaussian(Normal<f64>, f64, f64, u32),
    PowerLaw(WeightedIndex<f64>),
}

impl FeatureLaw {
    fn sampler(self) -> Result<Sampler> {
        let bad = |what: &str| Error::InvalidParameter(format!("{what} in {self:?}"));
        match self {
            FeatureLaw::Poisson { lambda } => {
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(bad("lambda must be positive"));
                }
                Ok(Sampler::Poisson(
                    Poisson::new(lambda).map_err(|_| bad("lambda"))?,
                ))
            }
            FeatureLaw::Gaussian {
                mean,
                std_dev,
                bins,
            } => {
                if !(mean.is_finite() && std_dev.is_finite() && std_dev > 0.0) || bins == 0 {
                    return Err(bad("need finite mean, positive std_dev and bins"));
                }
                let normal = Normal::new(mean, std_dev).map_err(|_| bad("std_dev"))?;
                Ok(Sampler::Gaussian(
                    normal,
                    mean - 3.0 * std_dev,
                    6.0 * std_dev,
                    bins,
                ))
            }
            FeatureLaw::PowerLaw { alpha, support } => {
                if !(alpha.is_finite() && alpha > 0.0) || support == 0 {
                    return Err(bad("need positive alpha and support"));
                }
                let weights = (1..=support).map(|k| f64::from(k).powf(-alpha));
                Ok(Sampler::PowerLaw(
                    WeightedIndex::new(weights).map_err(|_| bad("weights"))?,
                ))
            }
        }
    }
}

impl Sampler {
    fn draw<R: Rng>(&self, rng: &mut R) -> u64 {
        match self {
            Sampler::Poisson(d) => d.sample(rng) as u64,
            Sampler::Gaussian(d, lo, span, bins) => {
                let t = (d.sample(rng) - lo) / span * f64::from(*bins);
                t.floor().clamp(0.0, f64::from(bins - 1)) as u64
            }
            Sampler::PowerLaw(d) => d.sample(rng) as u64 + 1,
        }
    }
}

/// One-column dataset (column `x`) with labels independent of the feature.
pub fn generate_synthetic(
    law: FeatureLaw,
    label_prob: f64,
    size: usize,
    seed: u64,
) -> Result<Dataset> {
    let mut ds = generate_synthetic_columns(&[law], label_prob, size, seed)?;
    let col = ds.columns()[0].clone();
    ds.replace_column(
        0,
        Column {
            name: "x".into(),
            ..col
        },
    );
    Ok(ds)
}

/// Dataset with one independent column per law, named `x1`, `x2`, ...
pub fn generate_synthetic_columns(
    laws: &[FeatureLaw],
    label_prob: f64,
    size: usize,
    seed: u64,
) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&label_prob) {
        return Err(Error::InvalidParameter(format!(
            "label probability {label_prob} outside [0, 1]"
        )));
    }
    if size == 0 {
        return Err(Error::InvalidParameter("size must be at least 1".into()));
    }
    if laws.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one feature law is required".into(),
        ));
    }
    let samplers = laws
        .iter()
        .map(|l| l.sampler())
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![Vec::with_capacity(size); laws.len()];
    let mut labels = Vec::with_capacity(size);
    for _ in 0..size {
        for (col, s) in values.iter_mut().zip(&samplers) {
            col.push(s.draw(&mut rng).to_string());
        }
        labels.push(if rng.random_bool(label_prob) {
            Label::Positive
        } else {
            Label::Negative
        });
    }
    let columns = values
        .iter()
        .enumerate()
        .map(|(j, v)| Column::categorical(format!("x{}", j + 1), v))
        .collect();
    Dataset::new(columns, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    const POISSON: FeatureLaw = FeatureLaw::Poisson { lambda: 3.0 };

    #[test]
    fn boundary_label_probabilities() {
        let ds = generate_synthetic(POISSON, 0.0, 50, 1).unwrap();
        assert_eq!(ds.n_plus(), 0);
        let ds = generate_synthetic(POISSON, 1.0, 10, 1).unwrap();
        assert_eq!(ds.n_plus(), 10);
    }

    #[test]
    fn label_frequency_within_three_sigma() {
        let n = 10_000;
        let ds = generate_synthetic(POISSON, 0.5, n, 2024).unwrap();
        let freq = ds.n_plus() as f64 / n as f64;
        let se = (0.25 / n as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * se, "freq {freq}");
    }

    #[test]
    fn deterministic_per_seed() {
        let law = FeatureLaw::Gaussian {
            mean: 0.0,
            std_dev: 1.0,
            bins: 8,
        };
        let a = generate_synthetic(law, 0.3, 500, 9).unwrap();
        let b = generate_synthetic(law, 0.3, 500, 9).unwrap();
        assert_eq!(a.pattern_table().unwrap(), b.pattern_table().unwrap());
        let c = generate_synthetic(law, 0.3, 500, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn value_ranges() {
        let g = FeatureLaw::Gaussian {
            mean: 5.0,
            std_dev: 2.0,
            bins: 4,
        };
        let p = FeatureLaw::PowerLaw {
            alpha: 1.5,
            support: 6,
        };
        let ds = generate_synthetic_columns(&[g, p], 0.5, 2000, 3).unwrap();
        for s in ds.samples() {
            let g: u32 = s.features[0].parse().unwrap();
            let p: u32 = s.features[1].parse().unwrap();
            assert!(g < 4);
            assert!((1..=6).contains(&p));
        }
        assert_eq!(ds.column_names(), ["x1", "x2"]);
    }

    #[test]
    fn invalid_parameters() {
        assert!(generate_synthetic(FeatureLaw::Poisson { lambda: -1.0 }, 0.5, 5, 0).is_err());
        assert!(generate_synthetic(
            FeatureLaw::Gaussian {
                mean: 0.0,
                std_dev: 0.0,
                bins: 3
            },
            0.5,
            5,
            0
        )
        .is_err());
        assert!(generate_synthetic(
            FeatureLaw::PowerLaw {
                alpha: 1.0,
                support: 0
            },
            0.5,
            5,
            0
        )
        .is_err());
        assert!(generate_synthetic(POISSON, 1.5, 5, 0).is_err());
        assert!(generate_synthetic(POISSON, 0.5, 0, 0).is_err());
    }
}

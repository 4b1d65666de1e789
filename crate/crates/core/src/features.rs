//! Bound-driven feature selection and augmentation.
//!
//! Subsets are scored by the ceilings of their own pattern table, so no model is trained.
//! Refining patterns (adding a column) can only raise the AUC-ROC ceiling and lower the
//! overlap; a derived column that is a function of the existing ones changes neither.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::collections::HashMap;

use itertools::Itertools;
use log::info;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::auc_roc_upper_exact;
use crate::dataset::{build_pattern_table, Column, ColumnData, Dataset};
use crate::error::{Error, Result};
use crate::overlap::overlap_index;

/// Default cap on the number of subsets one exhaustive level may evaluate.
pub const DEFAULT_BUDGET: u64 = 100_000;

/// Ceilings of the table projected onto a column subset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetScore {
    pub subset: Vec<String>,
    pub ar_upper: f64,
    pub overlap: f64,
    pub d_patterns: usize,
    #[serde(skip)]
    ar_exact: Ratio<u128>,
    #[serde(skip)]
    indices: Vec<usize>,
}

impl SubsetScore {
    pub fn ar_upper_exact(&self) -> Ratio<u128> {
        self.ar_exact
    }

    /// Higher AR first, then lower overlap, then the lexicographically smaller column list.
    fn cmp_by_ar(&self, other: &Self) -> Ordering {
        self.ar_exact
            .cmp(&other.ar_exact)
            .then_with(|| other.overlap.total_cmp(&self.overlap))
            .then_with(|| other.indices.cmp(&self.indices))
    }

    /// Lower overlap first, then higher AR, then the lexicographically smaller column list.
    fn cmp_by_overlap(&self, other: &Self) -> Ordering {
        other
            .overlap
            .total_cmp(&self.overlap)
            .then_with(|| self.ar_exact.cmp(&other.ar_exact))
            .then_with(|| other.indices.cmp(&self.indices))
    }
}

fn score_indices(dataset: &Dataset, names: &[String], indices: Vec<usize>) -> Result<SubsetScore> {
    let subset: Vec<String> = indices.iter().map(|&i| names[i].clone()).collect();
    let table = build_pattern_table(dataset, &subset)?;
    Ok(SubsetScore {
        ar_upper: crate::bounds::auc_roc_upper(&table)?,
        ar_exact: auc_roc_upper_exact(&table)?,
        overlap: overlap_index(&table)?,
        d_patterns: table.d(),
        subset,
        indices,
    })
}

/// Scores the named columns. Order in `subset` is irrelevant; the result lists them in
/// dataset order.
pub fn bounds_for_subset<S: AsRef<str>>(dataset: &Dataset, subset: &[S]) -> Result<SubsetScore> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let names = dataset.column_names();
    let mut indices = subset
        .iter()
        .map(|s| dataset.column_index(s.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    indices.sort_unstable();
    indices.dedup();
    score_indices(dataset, &names, indices)
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * u128::from(n - i) / u128::from(i + 1);
        if c > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    c as u64
}

fn check_k(dataset: &Dataset, k: usize) -> Result<usize> {
    let width = dataset.columns().len();
    if k == 0 {
        return Err(Error::EmptySubset);
    }
    if k > width {
        return Err(Error::InvalidParameter(format!(
            "subset size {k} exceeds the {width} available columns"
        )));
    }
    Ok(width)
}

/// Both per-level winners of one exhaustive sweep.
fn exhaustive_level(
    dataset: &Dataset,
    k: usize,
    budget: u64,
) -> Result<(SubsetScore, SubsetScore)> {
    let width = check_k(dataset, k)?;
    let count = binomial(width as u64, k as u64);
    if count > budget {
        return Err(Error::BudgetExceeded(format!(
            "C({width}, {k}) = {count} subsets exceeds the budget of {budget}; use greedy selection"
        )));
    }
    let names = dataset.column_names();
    let combos: Vec<Vec<usize>> = (0..width).combinations(k).collect();
    let scores: Vec<SubsetScore> = combos
        .into_par_iter()
        .map(|c| score_indices(dataset, &names, c))
        .collect::<Result<_>>()?;
    let by_ar = scores.iter().max_by(|a, b| a.cmp_by_ar(b)).cloned();
    let by_overlap = scores.into_iter().max_by(|a, b| a.cmp_by_overlap(b));
    Ok((by_ar.expect("k >= 1"), by_overlap.expect("k >= 1")))
}

/// Best `k`-column subset by AUC-ROC ceiling over every `C(K, k)` choice.
pub fn exhaustive_best_subset(dataset: &Dataset, k: usize, budget: u64) -> Result<SubsetScore> {
    exhaustive_level(dataset, k, budget).map(|(best, _)| best)
}

/// Forward selection: each round adds the column giving the highest ceiling (lower overlap
/// on ties). Returns the score after every round, so `trace[k - 1]` holds `k` columns.
pub fn greedy_trace(dataset: &Dataset, k: usize) -> Result<Vec<SubsetScore>> {
    let width = check_k(dataset, k)?;
    let names = dataset.column_names();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    for _ in 0..k {
        let candidates: Vec<Vec<usize>> = (0..width)
            .filter(|c| !chosen.contains(c))
            .map(|c| {
                let mut s = chosen.clone();
                s.push(c);
                s.sort_unstable();
                s
            })
            .collect();
        let scores: Vec<SubsetScore> = candidates
            .into_par_iter()
            .map(|c| score_indices(dataset, &names, c))
            .collect::<Result<_>>()?;
        let best = scores
            .into_iter()
            .max_by(|a, b| a.cmp_by_ar(b))
            .expect("a column remains");
        chosen = best.indices.clone();
        trace.push(best);
    }
    Ok(trace)
}

pub fn greedy_best_subset(dataset: &Dataset, k: usize) -> Result<SubsetScore> {
    Ok(greedy_trace(dataset, k)?.pop().expect("k >= 1"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    Exhaustive { budget: u64 },
    Greedy,
}

/// Winners at one subset size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelScore {
    pub k: usize,
    /// Highest AUC-ROC ceiling among `k`-subsets.
    pub best: SubsetScore,
    /// Lowest overlap among `k`-subsets.
    pub min_overlap: SubsetScore,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionResult {
    pub levels: Vec<LevelScore>,
    pub full_overlap: f64,
    pub k_star: usize,
    /// Smallest subset whose overlap already equals the full table's.
    pub global_subset: Vec<String>,
}

/// Per-size curves and the smallest size whose best overlap reaches the full-table overlap
/// within `tolerance`.
pub fn optimal_dimension_kstar(
    dataset: &Dataset,
    mode: SelectionMode,
    tolerance: f64,
) -> Result<SelectionResult> {
    let width = dataset.columns().len();
    if width == 0 {
        return Err(Error::EmptySubset);
    }
    let full_overlap = overlap_index(&dataset.pattern_table()?)?;
    let levels: Vec<LevelScore> = match mode {
        SelectionMode::Exhaustive { budget } => (1..=width)
            .map(|k| {
                exhaustive_level(dataset, k, budget).map(|(best, min_overlap)| LevelScore {
                    k,
                    best,
                    min_overlap,
                })
            })
            .collect::<Result<_>>()?,
        SelectionMode::Greedy => greedy_trace(dataset, width)?
            .into_iter()
            .enumerate()
            .map(|(i, s)| LevelScore {
                k: i + 1,
                best: s.clone(),
                min_overlap: s,
            })
            .collect(),
    };
    let level = levels
        .iter()
        .find(|l| l.min_overlap.overlap <= full_overlap + tolerance)
        .expect("the full subset attains the full overlap");
    info!("k* = {} of {width} columns", level.k);
    Ok(SelectionResult {
        k_star: level.k,
        global_subset: level.min_overlap.subset.clone(),
        full_overlap,
        levels,
    })
}

/// Appends `name = transform(values of inputs)` as a categorical column.
pub fn augment_transform<S, F>(
    dataset: &Dataset,
    inputs: &[S],
    name: &str,
    transform: F,
) -> Result<Dataset>
where
    S: AsRef<str>,
    F: Fn(&[Cow<'_, str>]) -> String,
{
    let cols: Vec<&Column> = inputs
        .iter()
        .map(|s| dataset.column(s.as_ref()))
        .collect::<Result<_>>()?;
    let values: Vec<String> = (0..dataset.len())
        .map(|row| {
            let args: Vec<Cow<'_, str>> = cols.iter().map(|c| c.token(row)).collect();
            transform(&args)
        })
        .collect();
    let mut out = dataset.clone();
    out.push_column(Column::categorical(name, &values))?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    Mean,
    Count,
    Sum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Number of columns whose tokens differ.
    Hamming,
    /// Straight-line distance; every column must be numeric.
    Euclidean,
}

fn numeric_values(column: &Column) -> Option<Vec<f64>> {
    match &column.data {
        ColumnData::Numeric(v) => Some(v.clone()),
        ColumnData::Tokens { levels, codes } => {
            let parsed: Option<Vec<f64>> = levels
                .iter()
                .map(|l| l.trim().parse::<f64>().ok())
                .collect();
            parsed.map(|p| codes.iter().map(|&c| p[c as usize]).collect())
        }
    }
}

/// For every sample, aggregates over all samples at distance at most `radius` (itself
/// included) and appends the result. `Count` adds one column `nbr_count`; `Mean` and `Sum`
/// add `nbr_mean_<col>` / `nbr_sum_<col>` per column, which must hold numbers.
///
/// Neighborhoods depend only on the feature tuple, so equal tuples get equal new values.
pub fn augment_neighborhood(
    dataset: &Dataset,
    radius: f64,
    aggregator: Aggregator,
    metric: Metric,
) -> Result<Dataset> {
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "radius {radius} must be >= 0"
        )));
    }
    let cols = dataset.columns();
    if cols.is_empty() {
        return Err(Error::EmptySubset);
    }
    let numeric: Vec<Option<Vec<f64>>> = cols.iter().map(numeric_values).collect();
    if metric == Metric::Euclidean {
        if let Some(c) = cols.iter().find(|c| !c.is_numeric()) {
            return Err(Error::MetricMismatch(format!(
                "euclidean distance needs numeric columns, `{}` is categorical",
                c.name
            )));
        }
    }
    if aggregator != Aggregator::Count {
        if let Some((c, _)) = cols.iter().zip(&numeric).find(|(_, v)| v.is_none()) {
            return Err(Error::MetricMismatch(format!(
                "cannot average non-numeric column `{}`",
                c.name
            )));
        }
    }

    // distinct tuples in first-appearance order, with multiplicities
    let mut group_of_row = Vec::with_capacity(dataset.len());
    let mut first_rows: Vec<usize> = Vec::new();
    let mut sizes: Vec<u64> = Vec::new();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    for row in 0..dataset.len() {
        let key: Vec<u64> = cols.iter().map(|c| c.key(row)).collect();
        let g = *index.entry(key).or_insert_with(|| {
            first_rows.push(row);
            sizes.push(0);
            first_rows.len() - 1
        });
        sizes[g] += 1;
        group_of_row.push(g);
    }

    let distance = |a: usize, b: usize| -> f64 {
        match metric {
            Metric::Hamming => cols.iter().filter(|c| c.key(a) != c.key(b)).count() as f64,
            Metric::Euclidean => numeric
                .iter()
                .map(|v| {
                    let v = v.as_ref().expect("checked numeric");
                    (v[a] - v[b]).powi(2)
                })
                .sum::<f64>()
                .sqrt(),
        }
    };

    let width = if aggregator == Aggregator::Count {
        1
    } else {
        cols.len()
    };
    let per_group: Vec<Vec<f64>> = first_rows
        .par_iter()
        .map(|&a| {
            let mut count = 0u64;
            let mut sums = vec![0.0; width];
            for (&b, &size) in first_rows.iter().zip(&sizes) {
                if distance(a, b) <= radius {
                    count += size;
                    if aggregator != Aggregator::Count {
                        for (s, v) in sums.iter_mut().zip(&numeric) {
                            *s += size as f64 * v.as_ref().expect("checked numeric")[b];
                        }
                    }
                }
            }
            match aggregator {
                Aggregator::Count => vec![count as f64],
                Aggregator::Sum => sums,
                Aggregator::Mean => sums.into_iter().map(|s| s / count as f64).collect(),
            }
        })
        .collect();

    let mut out = dataset.clone();
    for j in 0..width {
        let name = match aggregator {
            Aggregator::Count => "nbr_count".to_owned(),
            Aggregator::Sum => format!("nbr_sum_{}", cols[j].name),
            Aggregator::Mean => format!("nbr_mean_{}", cols[j].name),
        };
        let values = group_of_row.iter().map(|&g| per_group[g][j]).collect();
        out.push_column(Column::numeric(name, values))?;
    }
    Ok(out)
}

use super::{Binning, Column, ColumnData, ColumnKind, ColumnSchema, Dataset};
use crate::error::{Error, Result};

/// Replaces every binned numeric column named in `schema` by bin indices `0..B`.
///
/// Edges are computed from all rows of `dataset`, so discretize before splitting.
pub fn discretize(dataset: &Dataset, schema: &[ColumnSchema]) -> Result<Dataset> {
    let mut out = dataset.clone();
    for s in schema {
        s.validate()?;
        if s.kind != ColumnKind::Numeric || s.binning == Binning::None {
            continue;
        }
        let index = dataset.column_index(&s.name)?;
        let values = match &dataset.columns()[index].data {
            ColumnData::Numeric(v) => v,
            ColumnData::Tokens { .. } => {
                return Err(Error::Schema(format!("column `{}` is not numeric", s.name)))
            }
        };
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NotNumeric {
                column: s.name.clone(),
                row: row + 1,
                value: values[row].to_string(),
            });
        }
        let (bins, codes) = match s.binning {
            Binning::EqualWidth(b) => (b, equal_width_bins(values, b)),
            Binning::Quantile(b) => {
                let codes = quantile_bins(values, b);
                if values.windows(2).all(|w| w[0] == w[1]) {
                    log::warn!("column `{}` is constant; every row falls in bin 0", s.name);
                }
                (b, codes)
            }
            Binning::None => unreachable!(),
        };
        let levels = (0..bins).map(|b| b.to_string()).collect();
        out.replace_column(
            index,
            Column {
                name: s.name.clone(),
                data: ColumnData::Tokens { levels, codes },
            },
        );
    }
    Ok(out)
}

/// Bins of width `(max - min) / bins`; the maximum joins the last bin.
pub(crate) fn equal_width_bins(values: &[f64], bins: u32) -> Vec<u32> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / f64::from(bins);
    values
        .iter()
        .map(|&v| {
            if width > 0.0 {
                (((v - lo) / width).floor() as u32).min(bins - 1)
            } else {
                0
            }
        })
        .collect()
}

/// Empirical quantile bins. Edge `k` is the lower order statistic at rank `ceil(k n / B)`;
/// a value equal to an edge stays in the lower bin.
pub(crate) fn quantile_bins(values: &[f64], bins: u32) -> Vec<u32> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let b = bins as usize;
    let edges: Vec<f64> = (1..b).map(|k| sorted[(k * n).div_ceil(b) - 1]).collect();
    values
        .iter()
        .map(|v| edges.partition_point(|e| e < v) as u32)
        .collect()
}

//! Labeled tabular data, discretization, and reduction to pattern counts.

mod binning;
mod load;
mod synthetic;
mod table;

use std::borrow::Cow;
use std::collections::HashMap;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use binning::discretize;
pub use load::load_csv;
pub use synthetic::{generate_synthetic, generate_synthetic_columns, FeatureLaw};
pub use table::{Counts, Pattern, PatternTable, PATTERN_SEPARATOR};

/// Binary class label. A score of zero maps to `Positive`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn from_sign(sign: i8) -> Option<Label> {
        match sign {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

/// One row: feature tokens in schema order and a label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub features: Vec<String>,
    pub label: Label,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Categorical,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binning {
    None,
    EqualWidth(u32),
    Quantile(u32),
}

impl FromStr for Binning {
    type Err = Error;

    /// Accepts `none`, `equal:B` (or `equal-width:B`) and `quantile:B`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("binning `{s}`"));
        if s == "none" {
            return Ok(Binning::None);
        }
        let (rule, bins) = s.split_once(':').ok_or_else(bad)?;
        let bins: u32 = bins.parse().map_err(|_| bad())?;
        match rule {
            "equal" | "equal-width" => Ok(Binning::EqualWidth(bins)),
            "quantile" => Ok(Binning::Quantile(bins)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub binning: Binning,
}

impl ColumnSchema {
    pub fn categorical(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Categorical,
            binning: Binning::None,
        }
    }

    /// Numeric column kept at full resolution (exact value equality).
    pub fn numeric(name: impl Into<String>) -> Self {
        Self::binned(name, Binning::None)
    }

    pub fn binned(name: impl Into<String>, binning: Binning) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Numeric,
            binning,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.binning) {
            (ColumnKind::Categorical, Binning::None) => Ok(()),
            (ColumnKind::Categorical, _) => Err(Error::Schema(format!(
                "categorical column `{}` cannot be binned",
                self.name
            ))),
            (_, Binning::EqualWidth(0) | Binning::Quantile(0)) => Err(Error::InvalidParameter(
                format!("column `{}`: bin count must be at least 1", self.name),
            )),
            _ => Ok(()),
        }
    }
}

/// Column storage: interned tokens or raw finite numbers.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnData {
    Tokens {
        levels: Vec<String>,
        codes: Vec<u32>,
    },
    Numeric(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, values: &[S]) -> Self {
        let mut index: HashMap<&str, u32> = HashMap::new();
        let mut levels = Vec::new();
        let codes = values
            .iter()
            .map(|v| {
                let v = v.as_ref();
                *index.entry(v).or_insert_with(|| {
                    levels.push(v.to_owned());
                    (levels.len() - 1) as u32
                })
            })
            .collect();
        Column {
            name: name.into(),
            data: ColumnData::Tokens { levels, codes },
        }
    }

    /// Numeric column; `-0.0` is normalized to `0.0` so equal values share one pattern.
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        let values = values
            .into_iter()
            .map(|v| if v == 0.0 { 0.0 } else { v })
            .collect();
        Column {
            name: name.into(),
            data: ColumnData::Numeric(values),
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Tokens { codes, .. } => codes.len(),
            ColumnData::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.data, ColumnData::Numeric(_))
    }

    pub fn token(&self, row: usize) -> Cow<'_, str> {
        match &self.data {
            ColumnData::Tokens { levels, codes } => Cow::Borrowed(&levels[codes[row] as usize]),
            ColumnData::Numeric(v) => Cow::Owned(v[row].to_string()),
        }
    }

    /// Per-row key that is equal exactly when the tokens are equal.
    pub(crate) fn key(&self, row: usize) -> u64 {
        match &self.data {
            ColumnData::Tokens { codes, .. } => u64::from(codes[row]),
            ColumnData::Numeric(v) => v[row].to_bits(),
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        let data = match &self.data {
            ColumnData::Tokens { levels, codes } => ColumnData::Tokens {
                levels: levels.clone(),
                codes: rows.iter().map(|&r| codes[r]).collect(),
            },
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
        };
        Column {
            name: self.name.clone(),
            data,
        }
    }
}

/// Column-oriented labeled dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    labels: Vec<Label>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, labels: Vec<Label>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for c in &columns {
            if c.len() != labels.len() {
                return Err(Error::Schema(format!(
                    "column `{}` has {} rows, labels have {}",
                    c.name,
                    c.len(),
                    labels.len()
                )));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::NameCollision(c.name.clone()));
            }
        }
        Ok(Dataset { columns, labels })
    }

    /// Builds an all-categorical dataset from rows.
    pub fn from_samples<S: AsRef<str>>(names: &[S], samples: &[Sample]) -> Result<Self> {
        if let Some(s) = samples.iter().find(|s| s.features.len() != names.len()) {
            return Err(Error::Schema(format!(
                "sample has {} features, schema has {}",
                s.features.len(),
                names.len()
            )));
        }
        let columns = names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let values: Vec<&str> = samples.iter().map(|s| s.features[j].as_str()).collect();
                Column::categorical(name.as_ref(), &values)
            })
            .collect();
        Dataset::new(columns, samples.iter().map(|s| s.label).collect())
    }

    /// Expands a table back into one row per sample, one categorical column per pattern
    /// token. Columns are named `f1, f2, ...` unless `names` is non-empty. Rows come grouped
    /// by pattern, positives first.
    pub fn from_pattern_table<S: AsRef<str>>(table: &PatternTable, names: &[S]) -> Result<Self> {
        let width = table.patterns().next().map_or(0, |p| p.tokens().len());
        if let Some(p) = table.patterns().find(|p| p.tokens().len() != width) {
            return Err(Error::Schema(format!(
                "pattern `{p}` has {} tokens, expected {width}",
                p.tokens().len()
            )));
        }
        let names: Vec<String> = if names.is_empty() {
            (1..=width).map(|j| format!("f{j}")).collect()
        } else if names.len() == width {
            names.iter().map(|s| s.as_ref().to_owned()).collect()
        } else {
            return Err(Error::Schema(format!(
                "{} names for {width} pattern tokens",
                names.len()
            )));
        };
        let mut samples = Vec::with_capacity(table.m() as usize);
        for (pattern, c) in table.entries() {
            for (label, n) in [(Label::Positive, c.pos), (Label::Negative, c.neg)] {
                for _ in 0..n {
                    samples.push(Sample {
                        features: pattern.tokens().to_vec(),
                        label,
                    });
                }
            }
        }
        Dataset::from_samples(&names, &samples)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    }

    pub(crate) fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    }

    pub(crate) fn replace_column(&mut self, index: usize, column: Column) {
        self.columns[index] = column;
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn n_plus(&self) -> u64 {
        self.labels.iter().filter(|l| l.is_positive()).count() as u64
    }

    pub fn sample(&self, row: usize) -> Sample {
        Sample {
            features: self
                .columns
                .iter()
                .map(|c| c.token(row).into_owned())
                .collect(),
            label: self.labels[row],
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample> + '_ {
        (0..self.len()).map(|r| self.sample(r))
    }

    /// Appends a column; names must stay unique.
    pub fn push_column(&mut self, column: Column) -> Result<()> {
        if self.columns.iter().any(|c| c.name == column.name) {
            return Err(Error::NameCollision(column.name));
        }
        if column.len() != self.len() {
            return Err(Error::Schema(format!(
                "column `{}` has {} rows, dataset has {}",
                column.name,
                column.len(),
                self.len()
            )));
        }
        self.columns.push(column);
        Ok(())
    }

    /// Rows in the given order (repeats allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }

    /// Table over every column.
    pub fn pattern_table(&self) -> Result<PatternTable> {
        let names = self.column_names();
        build_pattern_table(self, &names)
    }
}

const SHARD_ROWS: usize = 1 << 16;

/// Groups samples by their exact token tuple on `subset` and counts labels.
pub fn build_pattern_table<S: AsRef<str>>(dataset: &Dataset, subset: &[S]) -> Result<PatternTable> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let cols: Vec<&Column> = subset
        .iter()
        .map(|s| dataset.column(s.as_ref()))
        .collect::<Result<_>>()?;

    type Shard = HashMap<Box<[u64]>, (Counts, usize)>;
    let shard = |start: usize| -> Shard {
        let end = (start + SHARD_ROWS).min(dataset.len());
        let mut map: Shard = HashMap::new();
        let mut key = vec![0u64; cols.len()];
        for row in start..end {
            for (k, c) in key.iter_mut().zip(&cols) {
                *k = c.key(row);
            }
            let inc = match dataset.labels[row] {
                Label::Positive => Counts::new(1, 0),
                Label::Negative => Counts::new(0, 1),
            };
            if let Some(slot) = map.get_mut(key.as_slice()) {
                slot.0.pos += inc.pos;
                slot.0.neg += inc.neg;
            } else {
                map.insert(key.clone().into_boxed_slice(), (inc, row));
            }
        }
        map
    };
    let merged = (0..dataset.len())
        .into_par_iter()
        .step_by(SHARD_ROWS)
        .map(shard)
        .reduce(Shard::new, |mut a, b| {
            for (k, (c, row)) in b {
                let slot = a.entry(k).or_insert((Counts::default(), row));
                slot.0.pos += c.pos;
                slot.0.neg += c.neg;
                slot.1 = slot.1.min(row);
            }
            a
        });
    Ok(PatternTable::from_entries(merged.into_values().map(
        |(c, row)| {
            let pattern = Pattern(cols.iter().map(|col| col.token(row).into_owned()).collect());
            (pattern, c)
        },
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(tokens: &[&str], label: Label) -> Sample {
        Sample {
            features: tokens.iter().map(|t| t.to_string()).collect(),
            label,
        }
    }

    fn t1_dataset() -> Dataset {
        use Label::*;
        let rows = [
            ("a", Positive),
            ("a", Positive),
            ("a", Negative),
            ("b", Positive),
            ("b", Negative),
            ("b", Negative),
        ];
        let samples: Vec<_> = rows.iter().map(|(t, l)| sample(&[t], *l)).collect();
        Dataset::from_samples(&["f"], &samples).unwrap()
    }

    #[test]
    fn table_round_trips_through_samples() {
        let t = PatternTable::from_entries([
            (Pattern::new(["a", "x"]), Counts::new(2, 1)),
            (Pattern::new(["b", "x"]), Counts::new(0, 3)),
        ]);
        let ds = Dataset::from_pattern_table::<&str>(&t, &[]).unwrap();
        assert_eq!(ds.column_names(), ["f1", "f2"]);
        assert_eq!(ds.len(), 6);
        assert_eq!(ds.pattern_table().unwrap(), t);
        assert!(Dataset::from_pattern_table(&t, &["only"]).is_err());
        let ragged = PatternTable::from_entries([
            (Pattern::new(["a"]), Counts::new(1, 0)),
            (Pattern::new(["b", "c"]), Counts::new(0, 1)),
        ]);
        assert!(Dataset::from_pattern_table::<&str>(&ragged, &[]).is_err());
    }

    #[test]
    fn t1_counts() {
        let t = t1_dataset().pattern_table().unwrap();
        assert_eq!(t, PatternTable::from_counts([("a", 2, 1), ("b", 1, 2)]));
    }

    #[test]
    fn projection_merges_patterns() {
        use Label::*;
        let samples = vec![
            sample(&["a", "x"], Positive),
            sample(&["a", "y"], Negative),
            sample(&["b", "x"], Positive),
            sample(&["a", "x"], Positive),
        ];
        let ds = Dataset::from_samples(&["c1", "c2"], &samples).unwrap();
        let full = ds.pattern_table().unwrap();
        assert_eq!(full.d(), 3);
        assert_eq!(full.get(&Pattern::new(["a", "x"])), Some(Counts::new(2, 0)));
        let proj = build_pattern_table(&ds, &["c1"]).unwrap();
        assert_eq!(proj, PatternTable::from_counts([("a", 2, 1), ("b", 1, 0)]));
        assert_eq!(
            (proj.n_plus(), proj.n_minus()),
            (full.n_plus(), full.n_minus())
        );
    }

    #[test]
    fn unknown_and_empty_subsets_are_rejected() {
        let ds = t1_dataset();
        assert!(matches!(
            build_pattern_table(&ds, &["nope"]),
            Err(Error::MissingColumn(c)) if c == "nope"
        ));
        assert!(matches!(
            build_pattern_table::<&str>(&ds, &[]),
            Err(Error::EmptySubset)
        ));
    }

    #[test]
    fn sharded_build_matches_single_pass() {
        let n = SHARD_ROWS * 2 + 17;
        let vals: Vec<String> = (0..n).map(|i| (i % 7).to_string()).collect();
        let labels = (0..n)
            .map(|i| {
                if i % 3 == 0 {
                    Label::Positive
                } else {
                    Label::Negative
                }
            })
            .collect();
        let ds = Dataset::new(vec![Column::categorical("v", &vals)], labels).unwrap();
        let t = ds.pattern_table().unwrap();
        let mut expected = PatternTable::new();
        for i in 0..n {
            let c = if i % 3 == 0 {
                Counts::new(1, 0)
            } else {
                Counts::new(0, 1)
            };
            expected.add(Pattern::new([(i % 7).to_string()]), c);
        }
        assert_eq!(t, expected);
    }

    #[test]
    fn numeric_tokens_distinguish_values_and_fold_negative_zero() {
        let ds = Dataset::new(
            vec![Column::numeric("x", vec![0.0, -0.0, 1.5])],
            vec![Label::Positive, Label::Negative, Label::Positive],
        )
        .unwrap();
        let t = ds.pattern_table().unwrap();
        assert_eq!(t, PatternTable::from_counts([("0", 1, 1), ("1.5", 1, 0)]));
    }

    #[test]
    fn binning_spec_parses() {
        assert_eq!(
            "equal:4".parse::<Binning>().unwrap(),
            Binning::EqualWidth(4)
        );
        assert_eq!(
            "quantile:3".parse::<Binning>().unwrap(),
            Binning::Quantile(3)
        );
        assert_eq!("none".parse::<Binning>().unwrap(), Binning::None);
        assert!("median:2".parse::<Binning>().is_err());
    }

    #[test]
    fn schema_rules() {
        assert!(ColumnSchema::binned("x", Binning::Quantile(0))
            .validate()
            .is_err());
        let bad = ColumnSchema {
            name: "c".into(),
            kind: ColumnKind::Categorical,
            binning: Binning::EqualWidth(2),
        };
        assert!(bad.validate().is_err());
    }
}

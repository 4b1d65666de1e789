use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Separator between tokens when a pattern is written as a single CSV field.
pub const PATTERN_SEPARATOR: char = '|';

/// A distinct feature tuple. Ordering is lexicographic on the tokens.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pattern(pub Vec<String>);

impl Pattern {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Pattern(tokens.into_iter().map(Into::into).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    /// Parses the `|`-joined form written by [`PatternTable::write_csv`].
    pub fn parse_joined(s: &str) -> Self {
        Pattern(s.split(PATTERN_SEPARATOR).map(str::to_owned).collect())
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "{PATTERN_SEPARATOR}")?;
            }
            f.write_str(t)?;
        }
        Ok(())
    }
}

/// Positive and negative sample counts of one pattern.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counts {
    pub pos: u64,
    pub neg: u64,
}

impl Counts {
    pub const fn new(pos: u64, neg: u64) -> Self {
        Counts { pos, neg }
    }

    pub const fn total(self) -> u64 {
        self.pos + self.neg
    }

    /// Fraction of positives among the pattern's samples.
    pub fn p_plus(self) -> f64 {
        self.pos as f64 / self.total() as f64
    }

    pub fn max(self) -> u64 {
        self.pos.max(self.neg)
    }

    pub fn min(self) -> u64 {
        self.pos.min(self.neg)
    }

    fn add(&mut self, other: Counts) {
        self.pos += other.pos;
        self.neg += other.neg;
    }
}

/// Distinct patterns with their class counts, kept in canonical (lexicographic) order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PatternTable {
    entries: BTreeMap<Pattern, Counts>,
    n_plus: u64,
    n_minus: u64,
}

impl PatternTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table, summing counts of repeated patterns and dropping all-zero entries.
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (Pattern, Counts)>,
    {
        let mut t = Self::new();
        for (p, c) in entries {
            t.add(p, c);
        }
        t
    }

    /// Convenience constructor for single-token patterns.
    pub fn from_counts<S: Into<String>>(entries: impl IntoIterator<Item = (S, u64, u64)>) -> Self {
        Self::from_entries(
            entries
                .into_iter()
                .map(|(name, pos, neg)| (Pattern(vec![name.into()]), Counts::new(pos, neg))),
        )
    }

    pub fn add(&mut self, pattern: Pattern, counts: Counts) {
        if counts.total() == 0 {
            return;
        }
        self.entries.entry(pattern).or_default().add(counts);
        self.n_plus += counts.pos;
        self.n_minus += counts.neg;
    }

    /// Count merge; commutative and associative, so shards may be combined in any order.
    pub fn merge(&mut self, other: PatternTable) {
        for (p, c) in other.entries {
            self.add(p, c);
        }
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = (&Pattern, &Counts)> + '_ {
        self.entries.iter()
    }

    pub fn patterns(&self) -> impl ExactSizeIterator<Item = &Pattern> + '_ {
        self.entries.keys()
    }

    /// Counts in canonical pattern order.
    pub fn counts(&self) -> Vec<Counts> {
        self.entries.values().copied().collect()
    }

    pub fn get(&self, pattern: &Pattern) -> Option<Counts> {
        self.entries.get(pattern).copied()
    }

    /// Number of distinct patterns.
    pub fn d(&self) -> usize {
        self.entries.len()
    }

    pub fn n_plus(&self) -> u64 {
        self.n_plus
    }

    pub fn n_minus(&self) -> u64 {
        self.n_minus
    }

    pub fn m(&self) -> u64 {
        self.n_plus + self.n_minus
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyTable)
        } else {
            Ok(())
        }
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        if self.n_plus == 0 || self.n_minus == 0 {
            Err(Error::SingleClass {
                n_plus: self.n_plus,
                n_minus: self.n_minus,
            })
        } else {
            Ok(())
        }
    }

    /// Writes `pattern,pos,neg` rows in canonical order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["pattern", "pos", "neg"])?;
        for (p, c) in &self.entries {
            w.write_record([p.to_string(), c.pos.to_string(), c.neg.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_owned()))
        };
        let (ip, ipos, ineg) = (col("pattern")?, col("pos")?, col("neg")?);
        let mut table = PatternTable::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let count = |i: usize, column: &str| -> Result<u64> {
                let v = rec.get(i).unwrap_or("");
                v.trim().parse().map_err(|_| Error::NotNumeric {
                    column: column.to_owned(),
                    row: row + 1,
                    value: v.to_owned(),
                })
            };
            let counts = Counts::new(count(ipos, "pos")?, count(ineg, "neg")?);
            table.add(Pattern::parse_joined(rec.get(ip).unwrap_or("")), counts);
        }
        if table.is_empty() {
            return Err(Error::NoRows);
        }
        Ok(table)
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = TableDoc {
            entries: self
                .entries
                .iter()
                .map(|(p, c)| EntryDoc {
                    pattern: p.clone(),
                    pos: c.pos,
                    neg: c.neg,
                })
                .collect(),
            n_plus: self.n_plus,
            n_minus: self.n_minus,
            m: self.m(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses the JSON export, rejecting documents whose totals disagree with the entries.
    pub fn from_json(s: &str) -> Result<Self> {
        let doc: TableDoc = serde_json::from_str(s)?;
        let table = Self::from_entries(
            doc.entries
                .into_iter()
                .map(|e| (e.pattern, Counts::new(e.pos, e.neg))),
        );
        if table.n_plus != doc.n_plus || table.n_minus != doc.n_minus || table.m() != doc.m {
            return Err(Error::InvalidParameter(
                "pattern table totals disagree with entries".into(),
            ));
        }
        Ok(table)
    }
}

#[derive(Serialize, Deserialize)]
struct TableDoc {
    entries: Vec<EntryDoc>,
    n_plus: u64,
    n_minus: u64,
    m: u64,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    pattern: Pattern,
    pos: u64,
    neg: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t1() -> PatternTable {
        PatternTable::from_counts([("a", 2, 1), ("b", 1, 2)])
    }

    #[test]
    fn totals_follow_entries() {
        let t = t1();
        assert_eq!((t.n_plus(), t.n_minus(), t.m(), t.d()), (3, 3, 6, 2));
    }

    #[test]
    fn repeated_patterns_merge_and_empty_entries_vanish() {
        let t = PatternTable::from_counts([("a", 1, 0), ("a", 1, 1), ("z", 0, 0)]);
        assert_eq!(t.d(), 1);
        assert_eq!(t.get(&Pattern::new(["a"])), Some(Counts::new(2, 1)));
    }

    #[test]
    fn merge_is_order_independent() {
        let a = PatternTable::from_counts([("a", 1, 0), ("b", 0, 2)]);
        let b = PatternTable::from_counts([("b", 3, 0), ("c", 1, 1)]);
        let mut ab = a.clone();
        ab.merge(b.clone());
        let mut ba = b;
        ba.merge(a);
        assert_eq!(ab, ba);
    }

    #[test]
    fn csv_round_trip() {
        let t = PatternTable::from_entries([
            (Pattern::new(["x", "1"]), Counts::new(4, 0)),
            (Pattern::new(["y", "2"]), Counts::new(1, 3)),
        ]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "pattern,pos,neg\nx|1,4,0\ny|2,1,3\n");
        assert_eq!(PatternTable::read_csv(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn json_round_trip_and_total_check() {
        let t = t1();
        let json = t.to_json().unwrap();
        assert_eq!(PatternTable::from_json(&json).unwrap(), t);
        let bad = json.replace("\"m\": 6", "\"m\": 7");
        assert!(PatternTable::from_json(&bad).is_err());
    }

    #[test]
    fn header_only_csv_has_no_rows() {
        let err = PatternTable::read_csv("pattern,pos,neg\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::NoRows));
    }
}

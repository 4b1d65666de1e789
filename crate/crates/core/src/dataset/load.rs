use std::collections::BTreeSet;
use std::path::Path;

use super::{Column, ColumnKind, ColumnSchema, Dataset, Label};
use crate::error::{Error, Result};

/// Reads a headered CSV file.
///
/// With an empty `schema` every non-label column is loaded as categorical; otherwise only the
/// listed columns are loaded, in schema order. Numeric columns are parsed but not binned; pass
/// the same schema to [`super::discretize`] for that. A row with an empty cell in any used
/// column rejects the whole file, and the error lists every such row (1-based, header excluded).
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    positive_token: &str,
    schema: &[ColumnSchema],
) -> Result<Dataset> {
    for s in schema {
        s.validate()?;
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::NoRows);
    }
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    };
    let label_idx = find(label_column)?;
    let schema: Vec<ColumnSchema> = if schema.is_empty() {
        headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != label_idx)
            .map(|(_, h)| ColumnSchema::categorical(h))
            .collect()
    } else {
        schema.to_vec()
    };
    let idx: Vec<usize> = schema
        .iter()
        .map(|s| find(&s.name))
        .collect::<Result<_>>()?;

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); schema.len()];
    let mut raw_labels = Vec::new();
    let mut missing = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let label = record.get(label_idx).unwrap_or("");
        if label.is_empty() || idx.iter().any(|&i| record.get(i).unwrap_or("").is_empty()) {
            missing.push(row + 1);
            continue;
        }
        raw_labels.push(label.to_owned());
        for (store, &i) in cells.iter_mut().zip(&idx) {
            store.push(record[i].to_owned());
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingValues { rows: missing });
    }
    if raw_labels.is_empty() {
        return Err(Error::NoRows);
    }

    let tokens: BTreeSet<&str> = raw_labels.iter().map(String::as_str).collect();
    if tokens.len() > 2 {
        return Err(Error::LabelNotBinary(
            tokens.into_iter().map(str::to_owned).collect(),
        ));
    }
    if tokens.len() == 2 && !tokens.contains(positive_token) {
        return Err(Error::UnknownLabel {
            positive: positive_token.to_owned(),
            found: tokens.into_iter().map(str::to_owned).collect(),
        });
    }
    let labels = raw_labels
        .iter()
        .map(|l| {
            if l == positive_token {
                Label::Positive
            } else {
                Label::Negative
            }
        })
        .collect();

    let columns = schema
        .iter()
        .zip(cells)
        .map(|(s, values)| match s.kind {
            ColumnKind::Categorical => Ok(Column::categorical(s.name.clone(), &values)),
            ColumnKind::Numeric => {
                let parsed = values
                    .iter()
                    .enumerate()
                    .map(|(row, v)| match v.trim().parse::<f64>() {
                        Ok(x) if x.is_finite() => Ok(x),
                        _ => Err(Error::NotNumeric {
                            column: s.name.clone(),
                            row: row + 1,
                            value: v.clone(),
                        }),
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(Column::numeric(s.name.clone(), parsed))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(columns, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Binning, PatternTable};
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn six_rows_two_features() {
        let f = file("a,b,y\n1,x,y\n1,x,n\n2,x,y\n2,z,n\n1,z,n\n2,x,y\n");
        let ds = load_csv(f.path(), "y", "y", &[]).unwrap();
        assert_eq!(ds.len(), 6);
        assert_eq!(ds.column_names(), ["a", "b"]);
        assert_eq!(ds.n_plus(), 3);
        assert_eq!(ds.sample(3).features, ["2", "z"]);
    }

    #[test]
    fn three_label_tokens_are_rejected() {
        let f = file("a,y\n1,p\n2,q\n3,r\n");
        let err = load_csv(f.path(), "y", "p", &[]).unwrap_err();
        assert!(err.to_string().contains("label not binary"));
    }

    #[test]
    fn positive_token_must_appear_when_two_tokens() {
        let f = file("a,y\n1,p\n2,q\n");
        assert!(matches!(
            load_csv(f.path(), "y", "yes", &[]),
            Err(Error::UnknownLabel { .. })
        ));
    }

    #[test]
    fn empty_and_header_only_files_have_no_rows() {
        for text in ["", "a,y\n"] {
            let f = file(text);
            let err = load_csv(f.path(), "y", "1", &[]).unwrap_err();
            assert_eq!(err.to_string(), "no rows");
        }
    }

    #[test]
    fn missing_label_column_is_named() {
        let f = file("a,b\n1,2\n");
        let err = load_csv(f.path(), "target", "1", &[]).unwrap_err();
        assert!(err.to_string().contains("target"));
    }

    #[test]
    fn missing_cells_report_rows() {
        let f = file("a,b,y\n1,,1\n2,3,0\n,4,1\n");
        match load_csv(f.path(), "y", "1", &[]).unwrap_err() {
            Error::MissingValues { rows } => assert_eq!(rows, [1, 3]),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unused_columns_may_be_empty() {
        let f = file("a,junk,y\n1,,1\n2,,0\n");
        let ds = load_csv(f.path(), "y", "1", &[ColumnSchema::categorical("a")]).unwrap();
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn numeric_columns_parse_and_bin() {
        let f = file("v,y\n1,1\n2,0\n3,1\n4,0\n");
        let schema = [ColumnSchema::binned("v", Binning::EqualWidth(2))];
        let ds = load_csv(f.path(), "y", "1", &schema).unwrap();
        assert!(ds.column("v").unwrap().is_numeric());
        let binned = crate::dataset::discretize(&ds, &schema).unwrap();
        let t = binned.pattern_table().unwrap();
        assert_eq!(t, PatternTable::from_counts([("0", 1, 1), ("1", 1, 1)]));
    }

    #[test]
    fn non_numeric_cell_is_reported() {
        let f = file("v,y\n1,1\nabc,0\n");
        let err = load_csv(f.path(), "y", "1", &[ColumnSchema::numeric("v")]).unwrap_err();
        assert!(matches!(err, Error::NotNumeric { row: 2, .. }));
    }
}

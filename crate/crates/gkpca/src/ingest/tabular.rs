//! Numeric CSV matrices.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::{DataKind, DataMatrix, Dataset, Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CsvOptions {
    /// Last column is an integer label.
    pub has_labels: bool,
    /// First record is a header and is skipped.
    pub has_header: bool,
}

pub fn parse_csv<R: Read>(reader: R, opts: CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut width = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1 + usize::from(opts.has_header);
        let rec = rec.map_err(|e| Error::format(format!("row {line}: {e}")))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::format(format!(
                "row {line} has {} fields, expected {w}",
                rec.len()
            )));
        }
        let n_feat = if opts.has_labels { w - 1 } else { w };
        if n_feat == 0 {
            return Err(Error::format(format!("row {line} has no feature columns")));
        }
        for (c, cell) in rec.iter().take(n_feat).enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::format(format!("row {line}, column {}: not a number: {cell:?}", c + 1))
            })?;
            if !v.is_finite() {
                return Err(Error::format(format!("row {line}, column {}: non-finite", c + 1)));
            }
            values.push(v);
        }
        if opts.has_labels {
            let cell = &rec[w - 1];
            let l: i64 = cell.parse().map_err(|_| {
                Error::format(format!("row {line}: label is not an integer: {cell:?}"))
            })?;
            labels.push(l);
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| Error::format("CSV has no data rows"))?;
    let cols = if opts.has_labels { width - 1 } else { width };
    Dataset::new(
        DataMatrix::new(rows, cols, values)?,
        opts.has_labels.then_some(labels),
        DataKind::Tabular,
    )
}

pub fn load_csv(path: impl AsRef<Path>, opts: CsvOptions) -> Result<Dataset> {
    parse_csv(File::open(path)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_matrix() {
        let ds = parse_csv("1,2\n3,4\n5,6\n".as_bytes(), CsvOptions::default()).unwrap();
        assert_eq!((ds.x.rows(), ds.x.cols()), (3, 2));
        assert!(ds.labels.is_none());
    }

    #[test]
    fn label_column() {
        let opts = CsvOptions {
            has_labels: true,
            has_header: true,
        };
        let ds = parse_csv("a,b,label\n1.5,2,0\n3,4,1\n".as_bytes(), opts).unwrap();
        assert_eq!(ds.x.cols(), 2);
        assert_eq!(ds.labels.unwrap(), vec![0, 1]);
        assert_eq!(ds.x.row(0), &[1.5, 2.0]);
    }

    #[test]
    fn ragged_row_names_line() {
        let err = parse_csv("1,2\n3\n".as_bytes(), CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn non_numeric_cell() {
        let err = parse_csv("1,x\n".as_bytes(), CsvOptions::default()).unwrap_err();
        assert!(err.to_string().contains("row 1, column 2"), "{err}");
    }

    #[test]
    fn empty_input() {
        assert!(parse_csv("".as_bytes(), CsvOptions::default()).is_err());
    }
}

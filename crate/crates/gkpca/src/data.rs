//! Row-major data matrices and dataset metadata.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An `N × d_in` matrix of data points, one point per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(values.len()) {
            return Err(Error::input(format!(
                "data buffer of length {} does not match {rows}x{cols}",
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::input(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on zero width
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Keeps the rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            values,
        }
    }
}

/// What a row of the data matrix represents; drives rendering of generated samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataKind {
    ImageGrid { width: usize, height: usize },
    Signal { sample_rate_hz: f64 },
    Tabular,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DataMatrix,
    pub labels: Option<Vec<i64>>,
    pub kind: DataKind,
}

impl Dataset {
    pub fn new(x: DataMatrix, labels: Option<Vec<i64>>, kind: DataKind) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != x.rows() {
                return Err(Error::input(format!(
                    "{} labels for {} rows",
                    l.len(),
                    x.rows()
                )));
            }
        }
        if let DataKind::ImageGrid { width, height } = kind {
            if width.checked_mul(height) != Some(x.cols()) {
                return Err(Error::input(format!(
                    "image grid {width}x{height} does not match row width {}",
                    x.cols()
                )));
            }
        }
        Ok(Self { x, labels, kind })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }
}

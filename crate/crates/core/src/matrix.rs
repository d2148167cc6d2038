//! Dense row-major sample matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n × D` matrix of high-dimensional samples, one sample per row.
///
/// Construction validates that the matrix is non-empty and every value is
/// finite, so downstream code never has to re-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || dim == 0 {
            return Err(Error::invalid(format!(
                "data matrix must be non-empty, got {rows}x{dim}"
            )));
        }
        let expected = rows
            .checked_mul(dim)
            .ok_or_else(|| Error::invalid("data matrix size overflows"))?;
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: values.len() });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { rows, dim, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::invalid("data matrix must have at least one row"))?;
        let dim = first.as_ref().len();
        let mut values = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), dim, values)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl DoubleEndedIterator<Item = &[f64]> + ExactSizeIterator + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// New matrix holding the given rows in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::invalid(format!(
                    "row index {i} out of range for {} rows",
                    self.rows
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.dim, values)
    }

    /// Applies `f` to every row, producing a matrix of the same shape.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64], &mut [f64])) -> Result<Self> {
        let mut values = vec![0.0; self.values.len()];
        for (src, dst) in self.iter_rows().zip(values.chunks_exact_mut(self.dim)) {
            f(src, dst);
        }
        Self::new(self.rows, self.dim, values)
    }
}

/// Squared Euclidean distance. Four independent accumulators let the loop
/// vectorize; the summation order is fixed, so results are deterministic.
#[inline]
pub(crate) fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            let t = x[l] - y[l];
            acc[l] += t * t;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += (x - y) * (x - y);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    sq_euclidean(a, b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_values() {
        let err = DataMatrix::new(2, 2, vec![0.0, 1.0, f64::NAN, 2.0]).unwrap_err();
        assert!(err.to_string().contains("row 1, column 0"), "{err}");
        assert!(DataMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(DataMatrix::new(0, 3, vec![]).is_err());
        assert!(DataMatrix::new(2, 0, vec![]).is_err());
        assert!(DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn select_rows_preserves_order() {
        let x = DataMatrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        let s = x.select_rows(&[2, 0]).unwrap();
        assert_eq!(s.row(0), &[2.0, 2.0]);
        assert_eq!(s.row(1), &[0.0, 0.0]);
        assert!(x.select_rows(&[3]).is_err());
    }

    #[test]
    fn sq_euclidean_matches_naive_sum() {
        for len in [1usize, 3, 4, 7, 784] {
            let a: Vec<f64> = (0..len).map(|i| (i as f64 * 0.37).sin()).collect();
            let b: Vec<f64> = (0..len).map(|i| (i as f64 * 0.11).cos()).collect();
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
            assert!((sq_euclidean(&a, &b) - naive).abs() <= 1e-12 * naive.max(1.0), "len {len}");
        }
    }
}

//! Compressed-sparse-row storage for complex Hermitian operators.
//!
//! Both triangles are stored explicitly, so a matvec is a plain row sweep and
//! Hermiticity can be checked entry by entry.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

// rows per rayon task in the matvec
const ROW_CHUNK: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitianMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseHermitianMatrix {
    /// Assembles a matrix from per-row `(column, value)` lists. Columns within a row
    /// are sorted; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, Complex64)>>) -> Result<Self> {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            let start = col_idx.len();
            for (c, v) in row {
                if c >= dim {
                    return Err(Error::param("column", format!("column {c} in row {r} exceeds dimension {dim}")));
                }
                if col_idx.len() > start && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseHermitianMatrix { dim, row_ptr, col_idx, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_nnz(&self, row: usize) -> usize {
        self.row_ptr[row + 1] - self.row_ptr[row]
    }

    /// Stored `(column, value)` pairs of one row.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// Entry `(row, col)`, zero when not stored.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r).re).collect()
    }

    /// `y = H x`.
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(chunk, out)| {
            let first = chunk * ROW_CHUNK;
            for (offset, yr) in out.iter_mut().enumerate() {
                let r = first + offset;
                let mut acc = Complex64::new(0.0, 0.0);
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.values[k] * x[self.col_idx[k]];
                }
                *yr = acc;
            }
        });
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// Maximum absolute column sum. Equal to the max row sum for a Hermitian matrix.
    pub fn norm_one(&self) -> f64 {
        let mut col_sums = vec![0.0; self.dim];
        for (c, v) in self.col_idx.iter().zip(&self.values) {
            col_sums[*c] += v.norm();
        }
        col_sums.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |H[p,q] - conj(H[q,p])|` over stored entries, including the imaginary
    /// part of the diagonal.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Entrywise `max |A - B|` over the union of both sparsity patterns.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - other.get(r, c)).norm());
            }
            for (c, v) in other.row(r) {
                worst = worst.max((v - self.get(r, c)).norm());
            }
        }
        worst
    }

    /// Returns `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for r in 0..self.dim {
            let range = out.row_ptr[r]..out.row_ptr[r + 1];
            match out.col_idx[range.clone()].binary_search(&r) {
                Ok(k) => out.values[range.start + k] += shift,
                Err(_) => {
                    let rows = (0..self.dim)
                        .map(|row| {
                            let mut entries: Vec<_> = self.row(row).collect();
                            entries.push((row, Complex64::new(shift, 0.0)));
                            entries
                        })
                        .collect();
                    return Self::from_rows(rows).expect("same pattern plus diagonal");
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Debug dump as coordinate triplets `row,col,re,im`.
    pub fn write_triplets_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "row,col,re,im")?;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                writeln!(out, "{r},{c},{:e},{:e}", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample() -> SparseHermitianMatrix {
        SparseHermitianMatrix::from_rows(vec![
            vec![(1, c(0.0, 1.0)), (0, c(2.0, 0.0))],
            vec![(0, c(0.0, -1.0)), (2, c(-1.0, 0.5))],
            vec![(1, c(-1.0, -0.5)), (2, c(3.0, 0.0))],
        ])
        .unwrap()
    }

    #[test]
    fn csr_layout_and_lookup() {
        let m = sample();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.nnz(), 6);
        assert_eq!(m.row_nnz(0), 2);
        assert_eq!(m.get(0, 1), c(0.0, 1.0));
        assert_eq!(m.get(0, 2), c(0.0, 0.0));
        assert_eq!(m.diagonal(), vec![2.0, 0.0, 3.0]);
        assert_eq!(m.hermiticity_defect(), 0.0);
    }

    #[test]
    fn matvec_matches_dense() {
        let m = sample();
        let x = vec![c(1.0, 0.0), c(0.5, -2.0), c(0.0, 1.0)];
        let dense = m.to_dense() * nalgebra::DVector::from_vec(x.clone());
        let y = m.apply(&x);
        for (a, b) in y.iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn duplicates_sum_and_shift() {
        let m = SparseHermitianMatrix::from_rows(vec![
            vec![(0, c(1.0, 0.0)), (0, c(1.0, 0.0))],
            vec![(0, c(0.0, 0.0))],
        ])
        .unwrap();
        assert_eq!(m.get(0, 0), c(2.0, 0.0));
        let s = m.shifted(1.5);
        assert_eq!(s.get(0, 0), c(3.5, 0.0));
        assert_eq!(s.get(1, 1), c(1.5, 0.0));
    }

    #[test]
    fn norms() {
        let m = sample();
        assert!((m.norm_one() - (3.0 + 1.25f64.sqrt())).abs() < 1e-15);
        assert_eq!(m.max_abs_entry(), 3.0);
        assert_eq!(m.max_abs_difference(&m), 0.0);
    }

    #[test]
    fn triplet_dump() {
        let mut buf = Vec::new();
        sample().write_triplets_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("row,col,re,im\n0,0,2e0,0e0"));
    }

    #[test]
    fn rejects_bad_column() {
        assert!(SparseHermitianMatrix::from_rows(vec![vec![(3, c(1.0, 0.0))]]).is_err());
    }
}

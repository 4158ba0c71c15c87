//! Compressed sparse row matrices with deterministic assembly.
//!
//! Triplets are sorted by (row, col) and summed in that order before
//! compression, so repeated assembly of the same mesh produces
//! bit-identical matrices.

use crate::error::{Error, Result};
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> CsrMatrix {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx: Vec<usize> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < n_rows && c < n_cols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[r] = acc;
        }
        y
    }

    /// x^T A y (bilinear form)
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                triplets.push((*c, r, *v));
            }
        }
        CsrMatrix::from_triplets(self.n_cols, self.n_rows, triplets)
    }

    /// Linear combination of matrices that share a sparsity pattern, as the
    /// assembly guarantees for matrices built over the same mesh.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> Result<CsrMatrix> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Argument("empty linear combination".into()))?
            .1;
        let mut values = vec![0.0; first.nnz()];
        for (coeff, m) in terms {
            if m.row_ptr != first.row_ptr || m.col_idx != first.col_idx {
                return Err(Error::Argument(
                    "linear combination requires identical sparsity patterns".into(),
                ));
            }
            for (acc, v) in values.iter_mut().zip(&m.values) {
                *acc += coeff * v;
            }
        }
        Ok(CsrMatrix {
            n_rows: first.n_rows,
            n_cols: first.n_cols,
            row_ptr: first.row_ptr.clone(),
            col_idx: first.col_idx.clone(),
            values,
        })
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute asymmetry |A - A^T|.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut worst = 0.0f64;
        for r in 0..self.n_rows {
            let (c1, v1) = self.row(r);
            let (c2, v2) = t.row(r);
            // patterns may differ in principle; walk both sorted rows
            let (mut i, mut j) = (0, 0);
            while i < c1.len() || j < c2.len() {
                if j >= c2.len() || (i < c1.len() && c1[i] < c2[j]) {
                    worst = worst.max(v1[i].abs());
                    i += 1;
                } else if i >= c1.len() || c2[j] < c1[i] {
                    worst = worst.max(v2[j].abs());
                    j += 1;
                } else {
                    worst = worst.max((v1[i] - v2[j]).abs());
                    i += 1;
                    j += 1;
                }
            }
        }
        worst
    }

    /// Matrix Market coordinate export (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:.16e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_assembly_sums_duplicates() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, 1.0), (1, 1, 2.0), (0, 0, 3.0), (0, 1, -1.0)],
        );
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![3.0, 2.0]);
    }

    #[test]
    fn matvec_and_transpose() {
        let m = CsrMatrix::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]);
        assert_eq!(m.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 3.0]);
        let t = m.transpose();
        assert_eq!(t.n_rows(), 3);
        assert_eq!(t.matvec(&[1.0, 1.0]), vec![1.0, 3.0, 2.0]);
    }

    #[test]
    fn deterministic_assembly() {
        let t1 = vec![(0, 1, 0.1), (1, 0, 0.2), (0, 1, 0.3), (1, 1, 0.4)];
        let a = CsrMatrix::from_triplets(2, 2, t1.clone());
        let b = CsrMatrix::from_triplets(2, 2, t1);
        assert_eq!(a, b);
    }

    #[test]
    fn matrix_market_header() {
        let m = CsrMatrix::from_triplets(1, 1, vec![(0, 0, 2.5)]);
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n"));
        assert!(text.contains("1 1 1"));
    }
}

//! Row-major dense matrix with the small set of operations the solvers
//! need. Matrix products use the cache-friendly i-k-j loop order.

use crate::sparse::CsrMatrix;
use std::fmt;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{}", self.n_rows, self.n_cols)?;
        let show = self.n_rows.min(8);
        for r in 0..show {
            let cols = self.n_cols.min(8);
            let row: Vec<String> = (0..cols).map(|c| format!("{:>12.4e}", self.get(r, c))).collect();
            writeln!(f, "  [{}{}]", row.join(", "), if self.n_cols > 8 { ", ..." } else { "" })?;
        }
        if self.n_rows > show {
            writeln!(f, "  ...")?;
        }
        Ok(())
    }
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> DenseMatrix {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(
        n_rows: usize,
        n_cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n_rows, n_cols);
        for r in 0..n_rows {
            for c in 0..n_cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> DenseMatrix {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut m = DenseMatrix::zeros(n_rows, n_cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_cols);
            m.row_mut(r).copy_from_slice(row);
        }
        m
    }

    pub fn from_csr(csr: &CsrMatrix) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(csr.n_rows(), csr.n_cols());
        for r in 0..csr.n_rows() {
            let (cols, vals) = csr.row(r);
            for (c, v) in cols.iter().zip(vals) {
                m.set(r, *c, *v);
            }
        }
        m
    }

    /// Column vector from a slice.
    pub fn from_column(x: &[f64]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(x.len(), 1);
        for (i, v) in x.iter().enumerate() {
            m.set(i, 0, *v);
        }
        m
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.data[r * self.n_cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.data[r * self.n_cols + c] = v;
    }

    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n_cols + c] += v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    /// Two disjoint mutable row views (for row swaps/updates).
    pub fn rows_mut2(&mut self, r1: usize, r2: usize) -> (&mut [f64], &mut [f64]) {
        assert!(r1 != r2);
        let nc = self.n_cols;
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let (a, b) = self.data.split_at_mut(hi * nc);
        let first = &mut a[lo * nc..(lo + 1) * nc];
        let second = &mut b[..nc];
        if r1 < r2 {
            (first, second)
        } else {
            (second, first)
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.n_cols, self.n_rows);
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for r in 0..self.n_rows {
            let row = self.row(r);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[r] = acc;
        }
        y
    }

    /// C = A * B with i-k-j ordering (row-major friendly).
    pub fn matmul(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, b.n_rows);
        let mut c = DenseMatrix::zeros(self.n_rows, b.n_cols);
        for i in 0..self.n_rows {
            let arow = self.row(i);
            for (k, &aik) in arow.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let brow = b.row(k);
                let crow = c.row_mut(i);
                for (cv, bv) in crow.iter_mut().zip(brow) {
                    *cv += aik * bv;
                }
            }
        }
        c
    }

    pub fn add(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.n_rows, self.n_cols), (b.n_rows, b.n_cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&b.data) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.n_rows, self.n_cols), (b.n_rows, b.n_cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&b.data) {
            *x -= y;
        }
        out
    }

    /// self += alpha * b
    pub fn axpy(&mut self, alpha: f64, b: &DenseMatrix) {
        assert_eq!((self.n_rows, self.n_cols), (b.n_rows, b.n_cols));
        for (x, y) in self.data.iter_mut().zip(&b.data) {
            *x += alpha * y;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for x in &mut self.data {
            *x *= alpha;
        }
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// (A + A^T) / 2
    pub fn symmetrized(&self) -> DenseMatrix {
        assert!(self.is_square());
        DenseMatrix::from_fn(self.n_rows, self.n_cols, |r, c| {
            0.5 * (self.get(r, c) + self.get(c, r))
        })
    }

    pub fn max_asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for r in 0..self.n_rows {
            for c in (r + 1)..self.n_cols {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(r, c, self.get(r0 + r, c0 + c));
            }
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &DenseMatrix) {
        for r in 0..block.n_rows {
            for c in 0..block.n_cols {
                self.set(r0 + r, c0 + c, block.get(r, c));
            }
        }
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, c)).collect()
    }

    pub fn set_column(&mut self, c: usize, x: &[f64]) {
        assert_eq!(x.len(), self.n_rows);
        for (r, v) in x.iter().enumerate() {
            self.set(r, c, *v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_and_transpose() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let c = a.matmul(&b);
        assert_eq!(c.row(0), &[2.0, 1.0]);
        assert_eq!(c.row(1), &[4.0, 3.0]);
        let t = a.transpose();
        assert_eq!(t.row(0), &[1.0, 3.0]);
    }

    #[test]
    fn blocks_round_trip() {
        let a = DenseMatrix::from_fn(4, 4, |r, c| (r * 4 + c) as f64);
        let b = a.submatrix(1, 2, 2, 2);
        assert_eq!(b.get(0, 0), 6.0);
        let mut z = DenseMatrix::zeros(4, 4);
        z.set_block(1, 2, &b);
        assert_eq!(z.get(2, 3), 11.0);
    }

    #[test]
    fn symmetrize() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        let s = a.symmetrized();
        assert_eq!(s.get(0, 1), 1.0);
        assert_eq!(s.get(1, 0), 1.0);
        assert_eq!(s.max_asymmetry(), 0.0);
    }
}

//! LU with partial pivoting and Cholesky factorization.

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// LU factorization P A = L U with partial pivoting.
pub struct LuFactor {
    lu: DenseMatrix,
    pivots: Vec<usize>,
}

pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactor> {
    if !a.is_square() {
        return Err(Error::Argument("LU requires a square matrix".into()));
    }
    let n = a.n_rows();
    let mut lu = a.clone();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        // pivot search in column k
        let mut p = k;
        let mut best = lu.get(k, k).abs();
        for r in (k + 1)..n {
            let v = lu.get(r, k).abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return Err(Error::Numerical(format!(
                "matrix is singular to working precision (pivot column {k})"
            )));
        }
        pivots.push(p);
        if p != k {
            let (a, b) = lu.rows_mut2(k, p);
            a.swap_with_slice(b);
        }
        let pivot = lu.get(k, k);
        for r in (k + 1)..n {
            let factor = lu.get(r, k) / pivot;
            lu.set(r, k, factor);
            if factor != 0.0 {
                // row_r -= factor * row_k over columns k+1..n, contiguous
                let (row_k, row_r) = lu.rows_mut2(k, r);
                for c in (k + 1)..n {
                    row_r[c] -= factor * row_k[c];
                }
            }
        }
    }
    Ok(LuFactor { lu, pivots })
}

impl LuFactor {
    pub fn n(&self) -> usize {
        self.lu.n_rows()
    }

    /// Solve A x = b.
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n());
        let n = self.n();
        let mut x = b.to_vec();
        // the factorization swaps full rows, so apply the whole
        // permutation before the triangular solves
        for k in 0..n {
            x.swap(k, self.pivots[k]);
        }
        for k in 0..n {
            let xk = x[k];
            if xk != 0.0 {
                for r in (k + 1)..n {
                    x[r] -= self.lu.get(r, k) * xk;
                }
            }
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            let row = self.lu.row(r);
            for c in (r + 1)..n {
                acc -= row[c] * x[c];
            }
            x[r] = acc / row[r];
        }
        x
    }

    /// Solve A X = B column by column.
    pub fn solve_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(b.n_rows(), self.n());
        let mut x = DenseMatrix::zeros(b.n_rows(), b.n_cols());
        for c in 0..b.n_cols() {
            let col = self.solve_vec(&b.column(c));
            x.set_column(c, &col);
        }
        x
    }
}

/// Cholesky factorization A = L L^T of a symmetric positive definite
/// matrix; only the lower triangle of `a` is referenced.
pub struct CholeskyFactor {
    l: DenseMatrix,
}

pub fn cholesky(a: &DenseMatrix) -> Result<CholeskyFactor> {
    if !a.is_square() {
        return Err(Error::Argument("Cholesky requires a square matrix".into()));
    }
    let n = a.n_rows();
    let mut l = DenseMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..=r {
            let mut acc = a.get(r, c);
            for k in 0..c {
                acc -= l.get(r, k) * l.get(c, k);
            }
            if r == c {
                if acc <= 0.0 {
                    return Err(Error::Numerical(format!(
                        "matrix is not positive definite (pivot {r}: {acc:e})"
                    )));
                }
                l.set(r, r, acc.sqrt());
            } else {
                l.set(r, c, acc / l.get(c, c));
            }
        }
    }
    Ok(CholeskyFactor { l })
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.l.n_rows()
    }

    /// The lower factor L.
    pub fn l_matrix(&self) -> &DenseMatrix {
        &self.l
    }

    /// Solve L y = b (forward substitution).
    pub fn forward_solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut y = b.to_vec();
        for r in 0..n {
            let mut acc = y[r];
            let row = self.l.row(r);
            for c in 0..r {
                acc -= row[c] * y[c];
            }
            y[r] = acc / row[r];
        }
        y
    }

    /// Solve L^T x = b (back substitution).
    pub fn backward_solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut x = b.to_vec();
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in (r + 1)..n {
                acc -= self.l.get(c, r) * x[c];
            }
            x[r] = acc / self.l.get(r, r);
        }
        x
    }

    /// Solve A x = b.
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        self.backward_solve_vec(&self.forward_solve_vec(b))
    }

    /// Solve L Y = B (columns independently).
    pub fn forward_solve_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut x = DenseMatrix::zeros(b.n_rows(), b.n_cols());
        for c in 0..b.n_cols() {
            x.set_column(c, &self.forward_solve_vec(&b.column(c)));
        }
        x
    }

    /// Solve A X = B.
    pub fn solve_mat(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut x = DenseMatrix::zeros(b.n_rows(), b.n_cols());
        for c in 0..b.n_cols() {
            x.set_column(c, &self.solve_vec(&b.column(c)));
        }
        x
    }

    /// Congruence transform `L^{-1} A L^{-T}` (reduces the pencil
    /// `(A, L L^T)` to a standard problem).
    pub fn congruence(&self, a: &DenseMatrix) -> DenseMatrix {
        let w = self.forward_solve_mat(a); // L^{-1} A
        let wt = w.transpose();
        self.forward_solve_mat(&wt).transpose() // (L^{-1} W^T)^T = W L^{-T}
    }
}

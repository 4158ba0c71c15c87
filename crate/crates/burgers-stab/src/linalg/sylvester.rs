//! Lyapunov solves by the Bartels-Stewart method.

use super::factor::lu_factor;
use super::matrix::DenseMatrix;
use super::schur::{block_starts, schur_real};
use crate::error::{Error, Result};

/// Solve `A^T X + X A + Q = 0` for symmetric `Q` and stable `A`
/// (all eigenvalues in the open left half-plane).
///
/// One real Schur decomposition `A = U T U^T` reduces the equation to
/// `T^T Y + Y T + U^T Q U = 0`, solved block-column by block-column on
/// the quasi-triangular structure; each diagonal block pair gives a
/// Kronecker system of size at most 4.
pub fn solve_lyapunov(a: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() || !q.is_square() || a.n_rows() != q.n_rows() {
        return Err(Error::Argument(
            "Lyapunov solve needs square A and Q of equal size".into(),
        ));
    }
    let n = a.n_rows();
    let sf = schur_real(a)?;
    if let Some(bad) = sf.eigenvalues.iter().find(|e| e.re >= 0.0) {
        return Err(Error::Argument(format!(
            "Lyapunov solve requires a stable matrix; found eigenvalue {} + {}i",
            bad.re, bad.im
        )));
    }
    let qy = sf.q.transpose().matmul(q).matmul(&sf.q);
    let t = &sf.t;
    let blocks = block_starts(t);

    // T^T Y + Y T = -Qy, block (bi, bj):
    // T_ii^T Y_ij + Y_ij T_jj =
    //     -Qy_ij - sum_{l<i} T_li^T Y_lj - sum_{l<j} Y_il T_lj
    let mut y = DenseMatrix::zeros(n, n);
    for (bj, &(j0, js)) in blocks.iter().enumerate() {
        for (bi, &(i0, is)) in blocks.iter().enumerate().take(bj + 1) {
            let mut rhs = DenseMatrix::zeros(is, js);
            for r in 0..is {
                for c in 0..js {
                    rhs.set(r, c, -qy.get(i0 + r, j0 + c));
                }
            }
            // accumulated terms from already-solved blocks
            for &(l0, ls) in blocks.iter().take(bi) {
                // -T_li^T Y_lj
                for r in 0..is {
                    for c in 0..js {
                        let mut acc = 0.0;
                        for l in 0..ls {
                            acc += t.get(l0 + l, i0 + r) * y.get(l0 + l, j0 + c);
                        }
                        rhs.add_to(r, c, -acc);
                    }
                }
            }
            for &(l0, ls) in blocks.iter().take(bj) {
                // -Y_il T_lj
                for r in 0..is {
                    for c in 0..js {
                        let mut acc = 0.0;
                        for l in 0..ls {
                            acc += y.get(i0 + r, l0 + l) * t.get(l0 + l, j0 + c);
                        }
                        rhs.add_to(r, c, -acc);
                    }
                }
            }
            // small Sylvester: T_ii^T W + W T_jj = rhs
            let pq = is * js;
            let mut k = DenseMatrix::zeros(pq, pq);
            for c in 0..js {
                for r in 0..is {
                    let row = c * is + r;
                    for rr in 0..is {
                        k.add_to(row, c * is + rr, t.get(i0 + rr, i0 + r));
                    }
                    for cc in 0..js {
                        k.add_to(row, cc * is + r, t.get(j0 + cc, j0 + c));
                    }
                }
            }
            let mut rhs_vec = vec![0.0; pq];
            for c in 0..js {
                for r in 0..is {
                    rhs_vec[c * is + r] = rhs.get(r, c);
                }
            }
            let w = lu_factor(&k)
                .map_err(|_| {
                    Error::Numerical("Lyapunov block system singular (eigenvalue pairing)".into())
                })?
                .solve_vec(&rhs_vec);
            for c in 0..js {
                for r in 0..is {
                    y.set(i0 + r, j0 + c, w[c * is + r]);
                    y.set(j0 + c, i0 + r, w[c * is + r]);
                }
            }
        }
    }

    let x = sf.q.matmul(&y).matmul(&sf.q.transpose());
    Ok(x.symmetrized())
}

//! Real Schur decomposition A = Q T Q^T.
//!
//! Householder reduction to upper Hessenberg form followed by the Francis
//! implicit double-shift QR iteration with the usual small-subdiagonal
//! deflation and ad-hoc exceptional shifts. After convergence, 2x2
//! diagonal blocks with real eigenvalues are split by a Givens rotation,
//! so the final quasi-triangular T carries real eigenvalues on 1x1 blocks
//! and complex pairs on 2x2 blocks.
//!
//! `reorder_schur` moves selected eigenvalues to the leading block by
//! swapping adjacent diagonal blocks (Bai-Demmel direct swaps via a small
//! Sylvester solve and a QR factorization of the stacked subspace basis).

use super::factor::lu_factor;
use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Eigenvalue as a real/imaginary pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eig {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone)]
pub struct SchurForm {
    /// Orthogonal factor (empty 0x0 matrix when eigenvalues-only).
    pub q: DenseMatrix,
    /// Quasi-upper-triangular factor.
    pub t: DenseMatrix,
    /// Eigenvalues read off the diagonal blocks of `t`, in block order.
    pub eigenvalues: Vec<Eig>,
}

/// Householder reflector for a short vector: returns (v, tau) with
/// v[0] = 1 and (I - tau v v^T) x = beta e1.
fn householder(x: &[f64]) -> (Vec<f64>, f64) {
    let alpha = x[0];
    let sigma: f64 = x[1..].iter().map(|v| v * v).sum();
    let mut v = x.to_vec();
    v[0] = 1.0;
    if sigma == 0.0 {
        return (v, 0.0);
    }
    let norm = (alpha * alpha + sigma).sqrt();
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for w in v[1..].iter_mut() {
        *w *= scale;
    }
    (v, tau)
}

/// Apply (I - tau v v^T) from the left to rows `r0..r0+v.len()`,
/// columns `c0..c1`.
fn apply_left(h: &mut DenseMatrix, v: &[f64], tau: f64, r0: usize, c0: usize, c1: usize) {
    if tau == 0.0 || c0 >= c1 {
        return;
    }
    let m = v.len();
    let mut w = vec![0.0; c1 - c0];
    for (i, vi) in v.iter().enumerate() {
        if *vi == 0.0 {
            continue;
        }
        let row = &h.row(r0 + i)[c0..c1];
        for (acc, x) in w.iter_mut().zip(row) {
            *acc += vi * x;
        }
    }
    for i in 0..m {
        let f = tau * v[i];
        if f == 0.0 {
            continue;
        }
        let row = &mut h.row_mut(r0 + i)[c0..c1];
        for (x, acc) in row.iter_mut().zip(&w) {
            *x -= f * acc;
        }
    }
}

/// Apply (I - tau v v^T) from the right to columns `c0..c0+v.len()`,
/// rows `r0..r1`.
fn apply_right(h: &mut DenseMatrix, v: &[f64], tau: f64, c0: usize, r0: usize, r1: usize) {
    if tau == 0.0 || r0 >= r1 {
        return;
    }
    let m = v.len();
    for r in r0..r1 {
        let row = &mut h.row_mut(r)[c0..c0 + m];
        let mut s = 0.0;
        for (x, vi) in row.iter().zip(v) {
            s += x * vi;
        }
        let f = tau * s;
        for (x, vi) in row.iter_mut().zip(v) {
            *x -= f * vi;
        }
    }
}

/// Fused 3-row reflector from the left (bulge chase hot path).
fn apply_left3(h: &mut DenseMatrix, v: &[f64; 3], tau: f64, r0: usize, c0: usize, c1: usize) {
    if tau == 0.0 || c0 >= c1 {
        return;
    }
    let nc = h.n_cols();
    let data = h.data_mut();
    let (b0, b1, b2) = (r0 * nc, (r0 + 1) * nc, (r0 + 2) * nc);
    let (tv0, tv1, tv2) = (tau, tau * v[1], tau * v[2]);
    for c in c0..c1 {
        let x0 = data[b0 + c];
        let x1 = data[b1 + c];
        let x2 = data[b2 + c];
        let s = x0 + v[1] * x1 + v[2] * x2;
        data[b0 + c] = x0 - tv0 * s;
        data[b1 + c] = x1 - tv1 * s;
        data[b2 + c] = x2 - tv2 * s;
    }
}

/// Fused 3-column reflector from the right.
fn apply_right3(h: &mut DenseMatrix, v: &[f64; 3], tau: f64, c0: usize, r0: usize, r1: usize) {
    if tau == 0.0 || r0 >= r1 {
        return;
    }
    let nc = h.n_cols();
    let data = h.data_mut();
    let (tv0, tv1, tv2) = (tau, tau * v[1], tau * v[2]);
    for r in r0..r1 {
        let b = r * nc + c0;
        let x0 = data[b];
        let x1 = data[b + 1];
        let x2 = data[b + 2];
        let s = x0 + v[1] * x1 + v[2] * x2;
        data[b] = x0 - tv0 * s;
        data[b + 1] = x1 - tv1 * s;
        data[b + 2] = x2 - tv2 * s;
    }
}

/// Fused 2-row reflector from the left.
fn apply_left2(h: &mut DenseMatrix, v: &[f64; 2], tau: f64, r0: usize, c0: usize, c1: usize) {
    if tau == 0.0 || c0 >= c1 {
        return;
    }
    let nc = h.n_cols();
    let data = h.data_mut();
    let (b0, b1) = (r0 * nc, (r0 + 1) * nc);
    let (tv0, tv1) = (tau, tau * v[1]);
    for c in c0..c1 {
        let x0 = data[b0 + c];
        let x1 = data[b1 + c];
        let s = x0 + v[1] * x1;
        data[b0 + c] = x0 - tv0 * s;
        data[b1 + c] = x1 - tv1 * s;
    }
}

/// Fused 2-column reflector from the right.
fn apply_right2(h: &mut DenseMatrix, v: &[f64; 2], tau: f64, c0: usize, r0: usize, r1: usize) {
    if tau == 0.0 || r0 >= r1 {
        return;
    }
    let nc = h.n_cols();
    let data = h.data_mut();
    let (tv0, tv1) = (tau, tau * v[1]);
    for r in r0..r1 {
        let b = r * nc + c0;
        let x0 = data[b];
        let x1 = data[b + 1];
        let s = x0 + v[1] * x1;
        data[b] = x0 - tv0 * s;
        data[b + 1] = x1 - tv1 * s;
    }
}

/// Reduce to upper Hessenberg form in place, accumulating Q.
fn hessenberg(h: &mut DenseMatrix, q: Option<&mut DenseMatrix>) {
    let n = h.n_rows();
    let mut reflectors: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|r| h.get(r, k)).collect();
        let (v, tau) = householder(&x);
        if tau != 0.0 {
            apply_left(h, &v, tau, k + 1, k, n);
            apply_right(h, &v, tau, k + 1, 0, n);
            // zero the annihilated entries exactly
            for r in (k + 2)..n {
                h.set(r, k, 0.0);
            }
            reflectors.push((k, v, tau));
        }
    }
    if let Some(q) = q {
        for (k, v, tau) in &reflectors {
            apply_right(q, v, *tau, k + 1, 0, n);
        }
    }
}

fn block_eigenvalues(a: f64, b: f64, c: f64, d: f64) -> [Eig; 2] {
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let zz = p + sq.copysign(if p == 0.0 { 1.0 } else { p });
        [
            Eig { re: d + zz, im: 0.0 },
            Eig { re: a - zz, im: 0.0 },
        ]
    } else {
        let im = (-disc).sqrt();
        let re = 0.5 * (a + d);
        [Eig { re, im }, Eig { re, im: -im }]
    }
}

/// Apply a 2x2 rotation G = [[cs, -sn], [sn, cs]] as a similarity on rows
/// and columns (i, i+1), and to Q from the right.
fn apply_givens_similarity(
    t: &mut DenseMatrix,
    q: Option<&mut DenseMatrix>,
    i: usize,
    cs: f64,
    sn: f64,
) {
    let n = t.n_rows();
    // left: rows i, i+1 (G^T from the left)
    {
        let (ri, rj) = t.rows_mut2(i, i + 1);
        for c in 0..n {
            let a = ri[c];
            let b = rj[c];
            ri[c] = cs * a + sn * b;
            rj[c] = -sn * a + cs * b;
        }
    }
    // right: columns i, i+1
    for r in 0..n {
        let a = t.get(r, i);
        let b = t.get(r, i + 1);
        t.set(r, i, cs * a + sn * b);
        t.set(r, i + 1, -sn * a + cs * b);
    }
    if let Some(q) = q {
        for r in 0..q.n_rows() {
            let a = q.get(r, i);
            let b = q.get(r, i + 1);
            q.set(r, i, cs * a + sn * b);
            q.set(r, i + 1, -sn * a + cs * b);
        }
    }
}

/// Split 2x2 diagonal blocks whose eigenvalues are real, leaving only
/// complex-pair 2x2 blocks.
fn standardize_blocks(t: &mut DenseMatrix, mut q: Option<&mut DenseMatrix>) {
    let n = t.n_rows();
    let mut i = 0;
    while i + 1 < n {
        if t.get(i + 1, i) == 0.0 {
            i += 1;
            continue;
        }
        let (a, b, c, d) = (t.get(i, i), t.get(i, i + 1), t.get(i + 1, i), t.get(i + 1, i + 1));
        let p = 0.5 * (a - d);
        let disc = p * p + b * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let zz = p + sq.copysign(if p == 0.0 { 1.0 } else { p });
            // eigenvector (zz, c) for eigenvalue d + zz
            let r = (zz * zz + c * c).sqrt();
            if r > 0.0 {
                let (cs, sn) = (zz / r, c / r);
                apply_givens_similarity(t, q.as_deref_mut(), i, cs, sn);
            }
            t.set(i + 1, i, 0.0);
            i += 1; // re-examine nothing; both entries now 1x1
        } else {
            i += 2;
        }
    }
}

/// Francis double-shift QR on the Hessenberg matrix `h`, accumulating
/// transformations into `q` when present.
fn francis_qr(h: &mut DenseMatrix, mut q: Option<&mut DenseMatrix>) -> Result<()> {
    let n = h.n_rows();
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let hnorm = h.frobenius().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut local_iter = 0usize;
    let mut total_iter = 0usize;
    let max_total = 60 * n;

    let negligible = |h: &DenseMatrix, i: usize| -> bool {
        let s = h.get(i - 1, i - 1).abs() + h.get(i, i).abs();
        let tol = if s == 0.0 { eps * hnorm } else { eps * s };
        h.get(i, i - 1).abs() <= tol
    };

    'outer: loop {
        // deflate converged 1x1 and 2x2 blocks at the bottom
        loop {
            if hi == 0 {
                break 'outer;
            }
            if negligible(h, hi) {
                h.set(hi, hi - 1, 0.0);
                hi -= 1;
                local_iter = 0;
                continue;
            }
            if hi >= 2 && negligible(h, hi - 1) {
                h.set(hi - 1, hi - 2, 0.0);
                hi -= 2;
                local_iter = 0;
                if hi == 0 {
                    break 'outer;
                }
                continue;
            }
            if hi == 1 {
                // the whole remaining window is one 2x2 block
                break 'outer;
            }
            break;
        }

        // active window [lo, hi]
        let mut lo = hi;
        while lo > 0 && !negligible(h, lo) {
            lo -= 1;
        }
        if lo > 0 {
            h.set(lo, lo - 1, 0.0);
        }
        if hi - lo + 1 == 2 {
            // 2x2 window: treat as a converged block
            hi = lo.wrapping_sub(1);
            if hi == usize::MAX || hi == 0 {
                break 'outer;
            }
            local_iter = 0;
            continue;
        }

        total_iter += 1;
        local_iter += 1;
        if total_iter > max_total {
            return Err(Error::Numerical(format!(
                "QR iteration did not converge after {max_total} sweeps"
            )));
        }

        // double shift: trailing 2x2, or the classic exceptional shift
        // every ten stalled sweeps (breaks symmetric-spectrum cycling,
        // which plain trailing shifts cannot escape on Hamiltonians)
        let (s, t) = if local_iter > 0 && local_iter % 10 == 0 {
            let s_exc = h.get(hi, hi - 1).abs() + h.get(hi - 1, hi - 2).abs();
            let h11 = 0.75 * s_exc + h.get(hi, hi);
            let h12 = -0.4375 * s_exc;
            let h21 = s_exc;
            let h22 = h11;
            (h11 + h22, h11 * h22 - h12 * h21)
        } else {
            let a = h.get(hi - 1, hi - 1);
            let b = h.get(hi - 1, hi);
            let c = h.get(hi, hi - 1);
            let d = h.get(hi, hi);
            (a + d, a * d - b * c)
        };

        // first column of (H - s1)(H - s2) within the window
        let h00 = h.get(lo, lo);
        let h01 = h.get(lo, lo + 1);
        let h10 = h.get(lo + 1, lo);
        let h11 = h.get(lo + 1, lo + 1);
        let mut x = h00 * h00 + h01 * h10 - s * h00 + t;
        let mut y = h10 * (h00 + h11 - s);
        let mut z = h.get(lo + 2, lo + 1) * h10;

        for k in lo..=hi - 2 {
            let (v, tau) = householder(&[x, y, z]);
            let v3 = [v[0], v[1], v[2]];
            let c0 = k.saturating_sub(1).max(lo);
            apply_left3(h, &v3, tau, k, c0, n);
            apply_right3(h, &v3, tau, k, 0, (k + 4).min(hi + 1));
            if let Some(q) = q.as_deref_mut() {
                let nq = q.n_rows();
                apply_right3(q, &v3, tau, k, 0, nq);
            }
            if k > lo {
                // the reflector annihilated the bulge entries below the
                // subdiagonal in column k-1
                h.set(k + 1, k - 1, 0.0);
                h.set(k + 2, k - 1, 0.0);
            }
            x = h.get(k + 1, k);
            y = h.get(k + 2, k);
            if k + 3 <= hi {
                z = h.get(k + 3, k);
            } else {
                z = 0.0;
            }
        }
        // final 2-element reflector on rows (hi-1, hi)
        let (v, tau) = householder(&[x, y]);
        let v2 = [v[0], v[1]];
        apply_left2(h, &v2, tau, hi - 1, hi - 2, n);
        apply_right2(h, &v2, tau, hi - 1, 0, hi + 1);
        if let Some(q) = q.as_deref_mut() {
            let nq = q.n_rows();
            apply_right2(q, &v2, tau, hi - 1, 0, nq);
        }
        h.set(hi, hi - 2, 0.0);
    }

    // clear rounding noise below the first subdiagonal
    for r in 0..n {
        for c in 0..r.saturating_sub(1) {
            h.set(r, c, 0.0);
        }
    }
    for i in 1..n {
        if negligible(h, i) {
            h.set(i, i - 1, 0.0);
        }
    }
    Ok(())
}

fn read_eigenvalues(t: &DenseMatrix) -> Vec<Eig> {
    let n = t.n_rows();
    let mut eigs = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t.get(i + 1, i) != 0.0 {
            let pair = block_eigenvalues(
                t.get(i, i),
                t.get(i, i + 1),
                t.get(i + 1, i),
                t.get(i + 1, i + 1),
            );
            eigs.push(pair[0]);
            eigs.push(pair[1]);
            i += 2;
        } else {
            eigs.push(Eig {
                re: t.get(i, i),
                im: 0.0,
            });
            i += 1;
        }
    }
    eigs
}

fn schur_impl(a: &DenseMatrix, want_q: bool) -> Result<SchurForm> {
    if !a.is_square() {
        return Err(Error::Argument("Schur requires a square matrix".into()));
    }
    for v in a.data() {
        if !v.is_finite() {
            return Err(Error::Argument("matrix contains non-finite entries".into()));
        }
    }
    let n = a.n_rows();
    let mut t = a.clone();
    let mut q = if want_q {
        DenseMatrix::identity(n)
    } else {
        DenseMatrix::zeros(0, 0)
    };
    let q_opt = want_q.then_some(&mut q);
    hessenberg(&mut t, q_opt);
    francis_qr(&mut t, want_q.then_some(&mut q))?;
    standardize_blocks(&mut t, want_q.then_some(&mut q));
    let eigenvalues = read_eigenvalues(&t);
    Ok(SchurForm { q, t, eigenvalues })
}

/// Real Schur decomposition with the orthogonal factor.
pub fn schur_real(a: &DenseMatrix) -> Result<SchurForm> {
    schur_impl(a, true)
}

/// Eigenvalues only (no Q accumulation).
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<Eig>> {
    Ok(schur_impl(a, false)?.eigenvalues)
}

/// Largest real part of the spectrum.
pub fn spectral_abscissa(a: &DenseMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .fold(f64::NEG_INFINITY, |m, e| m.max(e.re)))
}

/// Diagonal block layout of a standardized quasi-triangular matrix.
pub(super) fn block_starts(t: &DenseMatrix) -> Vec<(usize, usize)> {
    let n = t.n_rows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        let size = if i + 1 < n && t.get(i + 1, i) != 0.0 { 2 } else { 1 };
        blocks.push((i, size));
        i += size;
    }
    blocks
}

/// Swap the adjacent diagonal blocks at (i, p) and (i+p, q): afterwards
/// the eigenvalues of the trailing block lead.
fn swap_adjacent_blocks(
    t: &mut DenseMatrix,
    q_acc: &mut DenseMatrix,
    i: usize,
    p: usize,
    qsz: usize,
) -> Result<()> {
    let n = t.n_rows();
    let t11 = t.submatrix(i, i, p, p);
    let t12 = t.submatrix(i, i + p, p, qsz);
    let t22 = t.submatrix(i + p, i + p, qsz, qsz);

    // Solve T11 X - X T22 = -T12 (Kronecker form, size p*q <= 4)
    let pq = p * qsz;
    let mut k = DenseMatrix::zeros(pq, pq);
    // vec by columns: X[r, c] -> index c*p + r
    for c in 0..qsz {
        for r in 0..p {
            let row = c * p + r;
            for rr in 0..p {
                k.add_to(row, c * p + rr, t11.get(r, rr));
            }
            for cc in 0..qsz {
                k.add_to(row, cc * p + r, -t22.get(cc, c));
            }
        }
    }
    let mut rhs = vec![0.0; pq];
    for c in 0..qsz {
        for r in 0..p {
            rhs[c * p + r] = -t12.get(r, c);
        }
    }
    let x = lu_factor(&k)
        .map_err(|_| Error::Numerical("block swap: singular Sylvester system".into()))?
        .solve_vec(&rhs);

    // Orthonormal basis of span([X; I]) via Householder QR of the stacked
    // (p+q) x q matrix, extended to a full orthogonal W.
    let m = p + qsz;
    let mut v = DenseMatrix::zeros(m, qsz);
    for c in 0..qsz {
        for r in 0..p {
            v.set(r, c, x[c * p + r]);
        }
        v.set(p + c, c, 1.0);
    }
    // full QR by applying reflectors to an identity
    let mut w = DenseMatrix::identity(m);
    let mut r_work = v.clone();
    for c in 0..qsz {
        let col: Vec<f64> = (c..m).map(|r| r_work.get(r, c)).collect();
        let (hv, tau) = householder(&col);
        apply_left(&mut r_work, &hv, tau, c, 0, qsz);
        apply_left(&mut w, &hv, tau, c, 0, m);
    }
    let w = w.transpose(); // columns now orthonormal, first q span [X; I]

    // similarity on the 2x2-block window: T <- W^T T W on rows/cols i..i+m
    let rows: Vec<usize> = (i..i + m).collect();
    // left: rows window, all columns i..n
    let mut tmp = DenseMatrix::zeros(m, n - i);
    for (a, &r) in rows.iter().enumerate() {
        for c in i..n {
            tmp.set(a, c - i, t.get(r, c));
        }
    }
    let wt_tmp = w.transpose().matmul(&tmp);
    for (a, &r) in rows.iter().enumerate() {
        for c in i..n {
            t.set(r, c, wt_tmp.get(a, c - i));
        }
    }
    // right: columns window, rows 0..i+m
    let mut tmp2 = DenseMatrix::zeros(i + m, m);
    for r in 0..i + m {
        for (b, &c) in rows.iter().enumerate() {
            tmp2.set(r, b, t.get(r, c));
        }
    }
    let tmp2_w = tmp2.matmul(&w);
    for r in 0..i + m {
        for (b, &c) in rows.iter().enumerate() {
            t.set(r, c, tmp2_w.get(r, b));
        }
    }
    // accumulate into Q
    let mut qtmp = DenseMatrix::zeros(q_acc.n_rows(), m);
    for r in 0..q_acc.n_rows() {
        for (b, &c) in rows.iter().enumerate() {
            qtmp.set(r, b, q_acc.get(r, c));
        }
    }
    let qtmp_w = qtmp.matmul(&w);
    for r in 0..q_acc.n_rows() {
        for (b, &c) in rows.iter().enumerate() {
            q_acc.set(r, c, qtmp_w.get(r, b));
        }
    }

    // zero the decoupled subdiagonal block exactly
    for r in (i + qsz)..(i + m) {
        for c in i..(i + qsz) {
            t.set(r, c, 0.0);
        }
    }
    Ok(())
}

/// Reorder the Schur form so eigenvalues satisfying `select` come first.
/// Returns the dimension of the leading selected invariant subspace.
pub fn reorder_schur(sf: &mut SchurForm, select: impl Fn(&Eig) -> bool) -> Result<usize> {
    let mut selected_dim = 0usize;
    let mut dst = 0usize; // element index where the next selected block goes
    loop {
        let blocks = block_starts(&sf.t);
        // first selected block at or after dst
        let mut found = None;
        for &(start, size) in &blocks {
            if start < dst {
                continue;
            }
            let eig = if size == 1 {
                Eig {
                    re: sf.t.get(start, start),
                    im: 0.0,
                }
            } else {
                block_eigenvalues(
                    sf.t.get(start, start),
                    sf.t.get(start, start + 1),
                    sf.t.get(start + 1, start),
                    sf.t.get(start + 1, start + 1),
                )[0]
            };
            if select(&eig) {
                found = Some((start, size));
                break;
            }
        }
        let Some((mut start, size)) = found else {
            break;
        };
        // bubble it up to dst by swapping with the unselected block above
        while start > dst {
            let blocks = block_starts(&sf.t);
            let above = blocks
                .iter()
                .rev()
                .find(|&&(s, _)| s < start)
                .copied()
                .ok_or_else(|| Error::Numerical("block bookkeeping failed in reorder".into()))?;
            swap_adjacent_blocks(&mut sf.t, &mut sf.q, above.0, above.1, size)?;
            start = above.0;
        }
        dst += size;
        selected_dim += size;
    }
    standardize_blocks(&mut sf.t, Some(&mut sf.q));
    sf.eigenvalues = read_eigenvalues(&sf.t);
    Ok(selected_dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn check_schur(a: &DenseMatrix, sf: &SchurForm) {
        let n = a.n_rows();
        // orthogonality
        let qtq = sf.q.transpose().matmul(&sf.q);
        let orth = qtq.sub(&DenseMatrix::identity(n)).frobenius();
        assert!(orth <= 1e-12 * n as f64, "orthogonality {orth}");
        // reconstruction
        let rec = sf.q.matmul(&sf.t).matmul(&sf.q.transpose());
        let err = rec.sub(a).frobenius();
        assert!(
            err <= 1e-10 * a.frobenius().max(1.0),
            "reconstruction {err}"
        );
        // quasi-triangular: no consecutive subdiagonals
        for i in 1..n {
            if sf.t.get(i, i - 1) != 0.0 && i + 1 < n {
                assert_eq!(sf.t.get(i + 1, i), 0.0, "consecutive subdiagonals at {i}");
            }
        }
    }

    #[test]
    fn rotation_matrix_has_imaginary_eigenvalues() {
        let a = DenseMatrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        let sf = schur_real(&a).unwrap();
        check_schur(&a, &sf);
        let mut ims: Vec<f64> = sf.eigenvalues.iter().map(|e| e.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-12);
        assert!((ims[1] - 1.0).abs() < 1e-12);
        assert!(sf.eigenvalues.iter().all(|e| e.re.abs() < 1e-12));
    }

    #[test]
    fn known_symmetric_spectrum_recovered() {
        // diag(1,2,3) conjugated by a rotation
        let theta = 0.7f64;
        let (c, s) = (theta.cos(), theta.sin());
        let g = DenseMatrix::from_rows(&[
            vec![c, -s, 0.0],
            vec![s, c, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let d = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ]);
        let a = g.matmul(&d).matmul(&g.transpose());
        let sf = schur_real(&a).unwrap();
        check_schur(&a, &sf);
        let mut res: Vec<f64> = sf.eigenvalues.iter().map(|e| e.re).collect();
        res.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in res.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn upper_triangular_input_is_fixed_point() {
        let a = DenseMatrix::from_rows(&[
            vec![2.0, 1.0, 0.5],
            vec![0.0, -1.0, 0.25],
            vec![0.0, 0.0, 3.0],
        ]);
        let sf = schur_real(&a).unwrap();
        check_schur(&a, &sf);
        // Q is the identity up to column signs
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((sf.q.get(r, c).abs() - expect).abs() < 1e-12);
            }
        }
        let mut res: Vec<f64> = sf.eigenvalues.iter().map(|e| e.re).collect();
        res.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((res[0] + 1.0).abs() < 1e-12);
        assert!((res[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn random_matrices_various_sizes() {
        let mut rng = StdRng::seed_from_u64(31);
        for n in [1usize, 2, 3, 5, 10, 40, 120] {
            let a = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let sf = schur_real(&a).unwrap();
            check_schur(&a, &sf);
            // eigenvalue sum equals trace
            let trace: f64 = (0..n).map(|i| a.get(i, i)).sum();
            let eig_sum: f64 = sf.eigenvalues.iter().map(|e| e.re).sum();
            assert!(
                (trace - eig_sum).abs() <= 1e-9 * trace.abs().max(1.0) * n as f64,
                "n={n}: trace {trace} vs {eig_sum}"
            );
        }
    }

    #[test]
    fn deterministic_repeat() {
        let mut rng = StdRng::seed_from_u64(8);
        let a = DenseMatrix::from_fn(20, 20, |_, _| rng.gen_range(-1.0..1.0));
        let s1 = schur_real(&a).unwrap();
        let s2 = schur_real(&a).unwrap();
        assert_eq!(s1.t, s2.t);
        assert_eq!(s1.q, s2.q);
    }

    #[test]
    fn reorder_moves_stable_eigenvalues_first() {
        let mut rng = StdRng::seed_from_u64(21);
        for n in [4usize, 7, 12, 30] {
            let a = DenseMatrix::from_fn(n, n, |r, c| {
                rng.gen_range(-1.0..1.0) + if r == c { 0.2 } else { 0.0 }
            });
            let mut sf = schur_real(&a).unwrap();
            let stable_count = sf.eigenvalues.iter().filter(|e| e.re < 0.0).count();
            let dim = reorder_schur(&mut sf, |e| e.re < 0.0).unwrap();
            assert_eq!(dim, stable_count, "n={n}");
            check_schur(&a, &sf);
            // leading block eigenvalues are the stable ones
            for (i, e) in sf.eigenvalues.iter().enumerate() {
                if i < dim {
                    assert!(e.re < 0.0, "position {i} not stable: {e:?}");
                } else {
                    assert!(e.re >= 0.0, "position {i} not antistable: {e:?}");
                }
            }
        }
    }

    #[test]
    fn abscissa_of_stable_matrix() {
        let a = DenseMatrix::from_rows(&[vec![-2.0, 1.0], vec![0.0, -0.5]]);
        assert!((spectral_abscissa(&a).unwrap() + 0.5).abs() < 1e-13);
    }
}

//! Generalized algebraic Riccati equation and feedback synthesis.
//!
//! The semidiscrete system `M z' = (A + omega M) z + B u` with cost
//! weights equal to the mass matrix leads to the generalized CARE
//!
//! ```text
//! P M^{-1} A_w + A_w^T M^{-1} P - P M^{-1} B M^{-1} B^T M^{-1} P + M = 0
//! ```
//!
//! with `A_w = A + omega M`. A Cholesky congruence `M = L L^T` turns it
//! into the standard equation `Pt Ah + Ah^T Pt - Pt Bh Bh^T Pt + I = 0`
//! with `Ah = L^{-1} A_w L^{-T}`, `Bh = L^{-1} B L^{-T}` and
//! `P = L Pt L^T`. The standard equation is solved by the Hamiltonian
//! Schur method (stable invariant subspace of `[[Ah, -Bh Bh^T],
//! [-I, -Ah^T]]`) followed by Newton-Kleinman refinement, which never
//! increases the residual.
//!
//! The feedback control is `u = -S P z` with the gain factor
//! `S = M^{-1} B^T M^{-1}`, and the closed-loop drift is
//! `A_w - B S P`. Certificates are measured, not assumed: the spectral
//! abscissa of `M^{-1}(A_w - B S P)`, the decay margin `omega_P` (the
//! negated largest eigenvalue of the symmetric closed-loop pencil
//! against `M`), and the gradient margin `alpha` (largest `alpha` with
//! `Sym(A_w - B S P) <= -omega_P M - alpha K` in the pencil sense).

use crate::assembly::{PhysicsParams, SystemMatrices};
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, lu_factor, reorder_schur, schur_real, solve_lyapunov, spectral_abscissa,
    symmetric_eigenvalues, symmetric_pencil_eigenvalues, DenseMatrix,
};
use crate::mesh::DofVector;

/// Data of one generalized CARE instance.
#[derive(Debug, Clone)]
pub struct CareProblem {
    /// shifted drift `A + omega M`
    pub a_shift: DenseMatrix,
    pub mass: DenseMatrix,
    pub control: DenseMatrix,
    /// stiffness matrix, used by the gradient-margin certificate
    pub stiffness: DenseMatrix,
    pub level: u32,
}

impl CareProblem {
    pub fn from_matrices(m: &SystemMatrices, params: &PhysicsParams) -> CareProblem {
        let mass = DenseMatrix::from_csr(&m.mass);
        let mut a_shift = DenseMatrix::from_csr(&m.drift);
        a_shift.axpy(params.omega, &mass);
        CareProblem {
            a_shift,
            mass,
            control: DenseMatrix::from_csr(&m.control),
            stiffness: DenseMatrix::from_csr(&m.stiffness),
            level: m.level,
        }
    }

    pub fn n(&self) -> usize {
        self.mass.n_rows()
    }
}

/// Riccati solution with feedback gain and measured certificates.
/// `closed_loop_abscissa`, `omega_p` and `alpha` are NaN until
/// [`certify_closed_loop`] runs.
#[derive(Debug, Clone)]
pub struct CareSolution {
    pub p: DenseMatrix,
    /// gain factor `S = M^{-1} B^T M^{-1}`; the control is `-S P z`
    pub gain: DenseMatrix,
    /// generalized residual relative to the Frobenius norm of `M`
    pub relative_residual: f64,
    /// residual history of the Newton-Kleinman refinement (standard
    /// coordinates), first entry is the Hamiltonian-Schur seed
    pub refinement_history: Vec<f64>,
    pub closed_loop_abscissa: f64,
    pub omega_p: f64,
    pub alpha: f64,
}

/// Congruence reduction to a standard CARE: returns `(Ah, Bh)` with
/// `Ah = L^{-1} A_w L^{-T}`, `Bh = L^{-1} B L^{-T}` for `M = L L^T`.
pub fn reduce_to_standard(problem: &CareProblem) -> Result<(DenseMatrix, DenseMatrix)> {
    let chol = cholesky(&problem.mass)?;
    Ok((
        chol.congruence(&problem.a_shift),
        chol.congruence(&problem.control),
    ))
}

/// Solve the standard CARE `Pt A + A^T Pt - Pt B B^T Pt + I = 0` by the
/// Hamiltonian Schur method with Newton-Kleinman polish. Returns the
/// symmetric solution and the refinement residual history.
pub fn solve_care(a_hat: &DenseMatrix, b_hat: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    let n = a_hat.n_rows();
    if !a_hat.is_square() || b_hat.n_rows() != n {
        return Err(Error::Argument(
            "CARE matrices must be square and of equal size".into(),
        ));
    }
    let s_hat = b_hat.matmul(&b_hat.transpose());

    // Hamiltonian [[A, -BB^T], [-I, -A^T]]
    let mut ham = DenseMatrix::zeros(2 * n, 2 * n);
    ham.set_block(0, 0, a_hat);
    ham.set_block(0, n, &s_hat.scaled(-1.0));
    ham.set_block(n, 0, &DenseMatrix::identity(n).scaled(-1.0));
    ham.set_block(n, n, &a_hat.transpose().scaled(-1.0));

    let mut sf = schur_real(&ham)?;
    let stable_dim = reorder_schur(&mut sf, |e| e.re < 0.0)?;
    if stable_dim != n {
        return Err(Error::Numerical(format!(
            "stabilizability failure: Hamiltonian has {stable_dim} stable eigenvalues, expected {n}"
        )));
    }
    let u11 = sf.q.submatrix(0, 0, n, n);
    let u21 = sf.q.submatrix(n, 0, n, n);
    // Pt = U21 U11^{-1} via U11^T X = U21^T
    let lu = lu_factor(&u11.transpose()).map_err(|_| {
        Error::Numerical("stabilizability failure: singular U11 in subspace extraction".into())
    })?;
    let mut p = lu.solve_mat(&u21.transpose()).transpose().symmetrized();

    // Newton-Kleinman refinement; keeps the best iterate, never lets the
    // residual grow.
    let scale = (n as f64).sqrt(); // ||I||_F
    let residual = |p: &DenseMatrix| -> f64 {
        let ap = a_hat.transpose().matmul(p);
        let mut r = ap.add(&ap.transpose());
        r.axpy(-1.0, &p.matmul(&s_hat).matmul(p));
        r.axpy(1.0, &DenseMatrix::identity(n));
        r.frobenius() / scale
    };
    let mut history = vec![residual(&p)];
    for _ in 0..6 {
        let best = *history.last().unwrap();
        if best <= 1e-13 {
            break;
        }
        let a_cl = a_hat.sub(&s_hat.matmul(&p));
        let q_nk = p.matmul(&s_hat).matmul(&p).add(&DenseMatrix::identity(n));
        let refined = match solve_lyapunov(&a_cl, &q_nk) {
            Ok(x) => x.symmetrized(),
            Err(_) => break,
        };
        let r_new = residual(&refined);
        if r_new >= best {
            break;
        }
        history.push(r_new);
        p = refined;
    }
    Ok((p, history))
}

/// Generalized residual of a candidate `P`, relative to `||M||_F`.
pub fn generalized_residual(problem: &CareProblem, p: &DenseMatrix) -> Result<f64> {
    let chol = cholesky(&problem.mass)?;
    let minv_a = chol.solve_mat(&problem.a_shift);
    let minv_b = chol.solve_mat(&problem.control);
    let minv_bt = chol.solve_mat(&problem.control.transpose());
    let minv_p = chol.solve_mat(p);
    let pma = p.matmul(&minv_a);
    let mut r = pma.add(&pma.transpose());
    r.axpy(-1.0, &p.matmul(&minv_b).matmul(&minv_bt).matmul(&minv_p));
    r.axpy(1.0, &problem.mass);
    Ok(r.frobenius() / problem.mass.frobenius())
}

/// Solve the generalized CARE of the problem; certificates are left NaN
/// for a later [`certify_closed_loop`].
pub fn solve_generalized_care(problem: &CareProblem) -> Result<CareSolution> {
    let chol = cholesky(&problem.mass)?;
    let (a_hat, b_hat) = reduce_to_standard(problem)?;
    let (pt, history) = solve_care(&a_hat, &b_hat)?;
    // P = L Pt L^T
    let l = chol.l_matrix();
    let p = l.matmul(&pt).matmul(&l.transpose()).symmetrized();
    // S = M^{-1} B^T M^{-1}
    let minv_bt = chol.solve_mat(&problem.control.transpose());
    let gain = chol.solve_mat(&minv_bt.transpose()).transpose();
    let relative_residual = generalized_residual(problem, &p)?;
    Ok(CareSolution {
        p,
        gain,
        relative_residual,
        refinement_history: history,
        closed_loop_abscissa: f64::NAN,
        omega_p: f64::NAN,
        alpha: f64::NAN,
    })
}

/// Closed-loop drift `A_w - B S P`.
pub fn closed_loop_drift(problem: &CareProblem, sol: &CareSolution) -> DenseMatrix {
    let bsp = problem.control.matmul(&sol.gain).matmul(&sol.p);
    problem.a_shift.sub(&bsp)
}

/// Measure the closed-loop certificates and store them on the solution:
/// spectral abscissa of `M^{-1}(A_w - B S P)`, decay margin `omega_P`,
/// and gradient margin `alpha`. Dense eigensolves; intended for levels
/// `k <= 6`.
pub fn certify_closed_loop(
    problem: &CareProblem,
    sol: &mut CareSolution,
) -> Result<(f64, f64, f64)> {
    let cl = closed_loop_drift(problem, sol);
    let chol = cholesky(&problem.mass)?;
    let abscissa = spectral_abscissa(&chol.solve_mat(&cl))?;

    let sym = cl.symmetrized();
    let pencil = symmetric_pencil_eigenvalues(&sym, &problem.mass)?;
    let omega_p = -pencil.last().copied().unwrap_or(f64::NAN);

    // largest alpha with Sym <= -omega_P M - alpha K: with the sharp
    // omega_P measured above this degenerates to zero up to eigensolver
    // rounding; it is reported for completeness.
    let mut c = sym.scaled(-1.0);
    c.axpy(-omega_p, &problem.mass);
    let alpha = symmetric_pencil_eigenvalues(&c, &problem.stiffness)?
        .first()
        .copied()
        .unwrap_or(f64::NAN);

    sol.closed_loop_abscissa = abscissa;
    sol.omega_p = omega_p;
    sol.alpha = alpha;
    Ok((abscissa, omega_p, alpha))
}

/// Feedback control `u = -S P z`.
pub fn feedback_apply(sol: &CareSolution, z: &DofVector) -> DofVector {
    let pz = sol.p.matvec(&z.values);
    let mut u = sol.gain.matvec(&pz);
    for v in &mut u {
        *v = -*v;
    }
    DofVector {
        level: z.level,
        values: u,
    }
}

/// Smallest eigenvalue of `P` together with its Frobenius norm, for the
/// positive-semidefiniteness check `lambda_min >= -1e-10 ||P||`.
pub fn psd_margin(p: &DenseMatrix) -> Result<(f64, f64)> {
    let eigs = symmetric_eigenvalues(p)?;
    Ok((eigs[0], p.frobenius()))
}

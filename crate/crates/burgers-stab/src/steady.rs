//! Steady states: consistent forcings, the Picard fixed-point solver for
//! the stationary Burgers equation, manufactured forcings for the
//! time-dependent runs, and discrete coercivity margins.
//!
//! The steady equation is `-eta Lap y_s + y_s v.grad y_s + nu0 y_s = f_s`
//! with homogeneous Dirichlet data. Given a closed-form `y_s`, the
//! consistent forcing comes out symbolically; conversely, given a load
//! vector the Picard iteration solves the discrete steady equation by
//! repeated linear solves `(eta K + nu0 M) Y_{m+1} = F - N(Y_m)`.

use crate::assembly::{self, PhysicsParams, SystemMatrices};
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::linalg::{self, DenseMatrix};
use crate::mesh::{DofVector, MeshLevel};
use crate::riccati::{closed_loop_drift, CareProblem, CareSolution};
use crate::sparse::CsrMatrix;

/// A steady profile with its exact symbolic derivatives and consistent
/// forcing.
#[derive(Debug, Clone)]
pub struct SteadyProfile {
    pub ys: Expr,
    pub grad: [Expr; 2],
    pub laplacian: Expr,
    pub fs: Expr,
}

impl SteadyProfile {
    pub fn new(ys: Expr, params: &PhysicsParams) -> SteadyProfile {
        let grad = ys.gradient();
        let laplacian = ys.laplacian();
        let fs = forcing_from_steady(&ys, params);
        SteadyProfile {
            ys,
            grad,
            laplacian,
            fs,
        }
    }
}

/// Consistent steady forcing
/// `f_s = -eta Lap y_s + y_s (v.grad y_s) + nu0 y_s`, built symbolically.
pub fn forcing_from_steady(ys: &Expr, params: &PhysicsParams) -> Expr {
    let grad = ys.gradient();
    let v_dot_grad = Expr::add(
        Expr::mul(Expr::constant(params.v[0]), grad[0].clone()),
        Expr::mul(Expr::constant(params.v[1]), grad[1].clone()),
    );
    Expr::add(
        Expr::add(
            Expr::mul(Expr::constant(-params.eta), ys.laplacian()),
            Expr::mul(ys.clone(), v_dot_grad),
        ),
        Expr::mul(Expr::constant(params.nu0), ys.clone()),
    )
}

/// Manufactured forcing for the shifted nonlinear system: the `g` such
/// that a prescribed `z(x, t)` solves
/// `z_t - eta Lap z + e^{-omega t} z v.grad z + y_s v.grad z
///  + (v.grad y_s) z + (nu0 - omega) z = g`.
pub fn manufactured_forcing(z_exact: &Expr, ys: &Expr, params: &PhysicsParams) -> Expr {
    let gz = z_exact.gradient();
    let gys = ys.gradient();
    let v = params.v;
    let v_dot_gz = Expr::add(
        Expr::mul(Expr::constant(v[0]), gz[0].clone()),
        Expr::mul(Expr::constant(v[1]), gz[1].clone()),
    );
    let v_dot_gys = Expr::add(
        Expr::mul(Expr::constant(v[0]), gys[0].clone()),
        Expr::mul(Expr::constant(v[1]), gys[1].clone()),
    );
    // e^{-omega t}
    let decay = Expr::exp(Expr::mul(
        Expr::constant(-params.omega),
        Expr::var(Var::T),
    ));
    let mut g = z_exact.diff(Var::T);
    g = Expr::add(
        g,
        Expr::mul(Expr::constant(-params.eta), z_exact.laplacian()),
    );
    g = Expr::add(
        g,
        Expr::mul(decay, Expr::mul(z_exact.clone(), v_dot_gz.clone())),
    );
    g = Expr::add(g, Expr::mul(ys.clone(), v_dot_gz));
    g = Expr::add(g, Expr::mul(v_dot_gys, z_exact.clone()));
    g = Expr::add(
        g,
        Expr::mul(Expr::constant(params.nu0 - params.omega), z_exact.clone()),
    );
    g
}

/// Picard fixed-point solve of the discrete steady Burgers equation:
/// `(eta K + nu0 M) Y_{m+1} = F - N(Y_m)`, started from zero, stopped
/// when the mass-norm increment drops below `tol`.
pub fn solve_steady_picard(
    mesh: &MeshLevel,
    fs_load: &DofVector,
    params: &PhysicsParams,
    tol: f64,
    max_iter: usize,
) -> Result<DofVector> {
    if !(tol > 0.0) {
        return Err(Error::Argument("Picard tolerance must be positive".into()));
    }
    params.validate()?;
    let zero = Expr::constant(0.0);
    let m = assembly::assemble_static(mesh, params, &zero, &crate::assembly::ControlRegion::Full)?;
    let system = CsrMatrix::linear_combination(&[
        (params.eta, &m.stiffness),
        (params.nu0, &m.mass),
    ])?;
    let lu = linalg::lu_factor(&DenseMatrix::from_csr(&system))?;
    let mass = &m.mass;

    let mut y = DofVector::zeros(mesh);
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let nvec = assembly::assemble_nonlinear(mesh, &y, params.v)?;
        let rhs: Vec<f64> = fs_load
            .values
            .iter()
            .zip(&nvec.values)
            .map(|(f, n)| f - n)
            .collect();
        let y_next = DofVector::from_values(mesh, lu.solve_vec(&rhs))?;
        let diff: Vec<f64> = y_next
            .values
            .iter()
            .zip(&y.values)
            .map(|(a, b)| a - b)
            .collect();
        let increment = mass.bilinear(&diff, &diff).max(0.0).sqrt();
        history.push(increment);
        y = y_next;
        if increment <= tol {
            return Ok(y);
        }
    }
    Err(Error::Convergence {
        what: format!("Picard steady solve at level {}", mesh.level()),
        history,
    })
}

/// Discrete coercivity margins of a sesquilinear form.
#[derive(Debug, Clone)]
pub struct CoercivityReport {
    /// largest `mu` with `Re a(phi, phi) >= mu ||phi||^2`:
    /// `lambda_min(Sym(eta K + A1 + A2 + nu0 M), M)`
    pub margin: f64,
    /// gradient margin measured against the stiffness pencil:
    /// `lambda_min(Sym(form), K)`
    pub grad_margin: f64,
    pub level: u32,
}

/// Margins of the open-loop form `a(.,.)`; dense eigensolves, intended
/// for levels `k <= 6`.
pub fn coercivity_margin(
    matrices: &SystemMatrices,
    _params: &PhysicsParams,
) -> Result<CoercivityReport> {
    // the form matrix is exactly -drift
    let form = DenseMatrix::from_csr(&matrices.drift).scaled(-1.0).symmetrized();
    let mass = DenseMatrix::from_csr(&matrices.mass);
    let stiff = DenseMatrix::from_csr(&matrices.stiffness);
    let margin = linalg::symmetric_pencil_eigenvalues(&form, &mass)?[0];
    let grad_margin = linalg::symmetric_pencil_eigenvalues(&form, &stiff)?[0];
    Ok(CoercivityReport {
        margin,
        grad_margin,
        level: matrices.level,
    })
}

/// Margins of the closed-loop form `-(A + omega M - B S P)` when a
/// Riccati gain is supplied; the mass-pencil margin is the decay rate
/// `omega_P` consumed by the nonlinear stability bound.
pub fn closed_loop_coercivity(
    problem: &CareProblem,
    sol: &CareSolution,
) -> Result<CoercivityReport> {
    let form = closed_loop_drift(problem, sol).scaled(-1.0).symmetrized();
    let margin = linalg::symmetric_pencil_eigenvalues(&form, &problem.mass)?[0];
    let grad_margin = linalg::symmetric_pencil_eigenvalues(&form, &problem.stiffness)?[0];
    Ok(CoercivityReport {
        margin,
        grad_margin,
        level: problem.level,
    })
}

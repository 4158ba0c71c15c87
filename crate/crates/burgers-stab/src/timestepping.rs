//! Time integration of the shifted semidiscrete systems.
//!
//! The first step uses backward Euler, every later step BDF2:
//!
//! ```text
//! (M - dt C) Z^1 = M Z^0
//! (1.5 M - dt C) Z^{n+1} = 2 M Z^n - 0.5 M Z^{n-1}
//! ```
//!
//! with the closed-loop drift `C = A + omega M - B S P` (or the open-loop
//! drift when no gain is supplied). The linear path factors each implicit
//! matrix once and reuses it for every step.
//!
//! The nonlinear path solves `F(Z^{n+1}) = 0` by Newton's method, where
//! the residual carries the implicitly treated convective term
//! `dt e^{-omega t_{n+1}} N(Z^{n+1})` and, when present, the forcing load
//! `dt <g(., t_{n+1}), phi>`. The Jacobian adds
//! `dt e^{-omega t_{n+1}}` times the exact derivative of `N`.

use crate::assembly::{self, PhysicsParams, SystemMatrices};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{lu_factor, DenseMatrix};
use crate::mesh::{DofVector, MeshLevel};
use crate::quadrature::QuadDegree;
use crate::riccati::CareSolution;

/// Uniform time grid with `dt * steps = T` (up to rounding).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub t_final: f64,
    pub steps: usize,
}

/// Rule for choosing the step from the mesh size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtRule {
    /// `dt <= h/2`, rounded so the horizon is an integer number of steps
    /// (at least two, so BDF2 participates)
    HOver2,
    Fixed(f64),
}

impl TimeGrid {
    pub fn new(dt: f64, t_final: f64) -> Result<TimeGrid> {
        if !(dt > 0.0) || !(t_final > 0.0) {
            return Err(Error::Config(format!(
                "time grid needs positive dt and T, got dt={dt}, T={t_final}"
            )));
        }
        let steps = (t_final / dt).round() as usize;
        if steps == 0 || (dt * steps as f64 - t_final).abs() > 1e-12 * t_final.max(1.0) {
            return Err(Error::Config(format!(
                "dt = {dt} does not divide T = {t_final} into whole steps"
            )));
        }
        Ok(TimeGrid { dt, t_final, steps })
    }

    pub fn from_rule(rule: DtRule, h: f64, t_final: f64) -> Result<TimeGrid> {
        match rule {
            DtRule::Fixed(dt) => TimeGrid::new(dt, t_final),
            DtRule::HOver2 => {
                let steps = ((t_final / (0.5 * h)).ceil() as usize).max(2);
                TimeGrid::new(t_final / steps as f64, t_final)
            }
        }
    }

    pub fn time_at(&self, n: usize) -> f64 {
        self.dt * n as f64
    }
}

/// Discrete trajectory of the shifted variable, with controls and norm
/// histories per time level.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DofVector>,
    pub controls: Vec<DofVector>,
    pub l2_norms: Vec<f64>,
    pub h1_norms: Vec<f64>,
    pub control_l2: Vec<f64>,
    /// Newton solves per time step (empty for linear runs).
    pub newton_iterations: Vec<usize>,
    /// Newton residual history per time step (empty for linear runs).
    pub newton_residuals: Vec<Vec<f64>>,
}

impl Trajectory {
    fn with_capacity(steps: usize) -> Trajectory {
        Trajectory {
            times: Vec::with_capacity(steps + 1),
            states: Vec::with_capacity(steps + 1),
            controls: Vec::with_capacity(steps + 1),
            l2_norms: Vec::with_capacity(steps + 1),
            h1_norms: Vec::with_capacity(steps + 1),
            control_l2: Vec::with_capacity(steps + 1),
            newton_iterations: Vec::new(),
            newton_residuals: Vec::new(),
        }
    }

    fn push_state(
        &mut self,
        matrices: &SystemMatrices,
        gain: Option<&CareSolution>,
        t: f64,
        z: DofVector,
    ) {
        let (l2, h1) = assembly::discrete_norms(matrices, &z);
        let u = match gain {
            Some(sol) => crate::riccati::feedback_apply(sol, &z),
            None => DofVector {
                level: z.level,
                values: vec![0.0; z.len()],
            },
        };
        let u_l2 = matrices
            .mass
            .bilinear(&u.values, &u.values)
            .max(0.0)
            .sqrt();
        self.times.push(t);
        self.l2_norms.push(l2);
        self.h1_norms.push(h1);
        self.control_l2.push(u_l2);
        self.states.push(z);
        self.controls.push(u);
    }

    /// Index of the stored time level nearest to `t`, if within half a
    /// step of it.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        if self.times.len() < 2 {
            return (self.times.first().copied() == Some(t)).then_some(0);
        }
        let dt = self.times[1] - self.times[0];
        let idx = ((t - self.times[0]) / dt).round() as isize;
        if idx < 0 || idx as usize >= self.times.len() {
            return None;
        }
        let idx = idx as usize;
        ((self.times[idx] - t).abs() <= 0.5 * dt + 1e-12).then_some(idx)
    }
}

/// Closed- or open-loop drift as a dense matrix.
fn dense_drift(
    matrices: &SystemMatrices,
    params: &PhysicsParams,
    gain: Option<&CareSolution>,
) -> DenseMatrix {
    let mass = DenseMatrix::from_csr(&matrices.mass);
    let mut c = DenseMatrix::from_csr(&matrices.drift);
    c.axpy(params.omega, &mass);
    if let Some(sol) = gain {
        let bsp = DenseMatrix::from_csr(&matrices.control)
            .matmul(&sol.gain)
            .matmul(&sol.p);
        c.axpy(-1.0, &bsp);
    }
    c
}

fn check_initial(matrices: &SystemMatrices, z0: &DofVector) -> Result<()> {
    if z0.level != matrices.level || z0.len() != matrices.n {
        return Err(Error::Argument(format!(
            "initial state (level {}, len {}) does not match matrices (level {}, n {})",
            z0.level,
            z0.len(),
            matrices.level,
            matrices.n
        )));
    }
    Ok(())
}

/// Integrate the linear shifted system, optionally closed by a Riccati
/// gain. Implicit matrices are factored once.
pub fn simulate_linear(
    matrices: &SystemMatrices,
    params: &PhysicsParams,
    gain: Option<&CareSolution>,
    z0: &DofVector,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    check_initial(matrices, z0)?;
    let mass = DenseMatrix::from_csr(&matrices.mass);
    let c = dense_drift(matrices, params, gain);
    let dt = grid.dt;

    let mut e1 = mass.clone();
    e1.axpy(-dt, &c);
    let lu1 = lu_factor(&e1)
        .map_err(|_| Error::Numerical("singular implicit matrix in backward Euler step".into()))?;

    let mut traj = Trajectory::with_capacity(grid.steps);
    traj.push_state(matrices, gain, 0.0, z0.clone());

    if grid.steps >= 1 {
        let rhs = matrices.mass.matvec(&z0.values);
        let z1 = DofVector {
            level: z0.level,
            values: lu1.solve_vec(&rhs),
        };
        traj.push_state(matrices, gain, grid.time_at(1), z1);
    }
    if grid.steps >= 2 {
        let mut e2 = mass.scaled(1.5);
        e2.axpy(-dt, &c);
        let lu2 = lu_factor(&e2)
            .map_err(|_| Error::Numerical("singular implicit matrix in BDF2 step".into()))?;
        for n in 1..grid.steps {
            let zn = &traj.states[n];
            let znm1 = &traj.states[n - 1];
            let m_zn = matrices.mass.matvec(&zn.values);
            let m_znm1 = matrices.mass.matvec(&znm1.values);
            let rhs: Vec<f64> = m_zn
                .iter()
                .zip(&m_znm1)
                .map(|(a, b)| 2.0 * a - 0.5 * b)
                .collect();
            let z = DofVector {
                level: z0.level,
                values: lu2.solve_vec(&rhs),
            };
            traj.push_state(matrices, gain, grid.time_at(n + 1), z);
        }
    }
    Ok(traj)
}

/// Newton configuration for the nonlinear implicit solves.
#[derive(Debug, Clone, Copy)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-10,
            max_iter: 25,
        }
    }
}

/// Integrate the nonlinear shifted system with the implicit convective
/// term, optional forcing and optional Riccati feedback.
#[allow(clippy::too_many_arguments)]
pub fn simulate_nonlinear(
    mesh: &MeshLevel,
    matrices: &SystemMatrices,
    params: &PhysicsParams,
    gain: Option<&CareSolution>,
    z0: &DofVector,
    grid: &TimeGrid,
    forcing: Option<&Expr>,
    newton: &NewtonConfig,
) -> Result<Trajectory> {
    check_initial(matrices, z0)?;
    if !(newton.tol > 0.0) {
        return Err(Error::Config("Newton tolerance must be positive".into()));
    }
    let mass = DenseMatrix::from_csr(&matrices.mass);
    let c = dense_drift(matrices, params, gain);
    let dt = grid.dt;
    let load_degree = match forcing {
        Some(g) if g.has_transcendental() => QuadDegree::TRIG,
        _ => QuadDegree::DEFAULT,
    };

    let mut traj = Trajectory::with_capacity(grid.steps);
    traj.push_state(matrices, gain, 0.0, z0.clone());

    for n in 0..grid.steps {
        let t_next = grid.time_at(n + 1);
        let decay = (-params.omega * t_next).exp();
        let first = n == 0;
        // constant part of the residual for this step
        let mut rhs = vec![0.0; matrices.n];
        if first {
            let m_z0 = matrices.mass.matvec(&traj.states[0].values);
            rhs.copy_from_slice(&m_z0);
        } else {
            let m_zn = matrices.mass.matvec(&traj.states[n].values);
            let m_znm1 = matrices.mass.matvec(&traj.states[n - 1].values);
            for (r, (a, b)) in rhs.iter_mut().zip(m_zn.iter().zip(&m_znm1)) {
                *r = 2.0 * a - 0.5 * b;
            }
        }
        if let Some(g) = forcing {
            let load = assembly::load_vector(mesh, g, t_next, load_degree)?;
            for (r, l) in rhs.iter_mut().zip(&load.values) {
                *r += dt * l;
            }
        }
        let mass_coeff = if first { 1.0 } else { 1.5 };
        // base = mass_coeff M - dt C (C already carries the feedback)
        let mut base = mass.scaled(mass_coeff);
        base.axpy(-dt, &c);

        // Newton iteration from the previous time level
        let mut z = traj.states[n].clone();
        let mut residuals = Vec::new();
        let mut iterations = 0usize;
        let mut converged = false;
        loop {
            let nvec = assembly::assemble_nonlinear(mesh, &z, params.v)?;
            let mut f = base.matvec(&z.values);
            for ((fi, nv), r) in f.iter_mut().zip(&nvec.values).zip(&rhs) {
                *fi += dt * decay * nv - r;
            }
            let rnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            residuals.push(rnorm);
            if rnorm <= newton.tol {
                converged = true;
                break;
            }
            if iterations >= newton.max_iter {
                break;
            }
            let jac_n = assembly::assemble_nonlinear_jacobian(mesh, &z, params.v)?;
            let mut g = base.clone();
            g.axpy(dt * decay, &DenseMatrix::from_csr(&jac_n));
            let lu = lu_factor(&g).map_err(|_| {
                Error::Numerical(format!("singular Newton matrix at step {}", n + 1))
            })?;
            let delta = lu.solve_vec(&f);
            for (zi, d) in z.values.iter_mut().zip(&delta) {
                *zi -= d;
            }
            iterations += 1;
        }
        if !converged {
            return Err(Error::Convergence {
                what: format!(
                    "Newton at step {} (t = {t_next:.6}) after {iterations} iterations",
                    n + 1
                ),
                history: residuals,
            });
        }
        traj.newton_iterations.push(iterations);
        traj.newton_residuals.push(residuals);
        traj.push_state(matrices, gain, t_next, z);
    }
    Ok(traj)
}

/// Map a shifted trajectory back to physical variables:
/// `y = e^{-omega t} z + y_s`, `u_phys = e^{-omega t} u`; norms are
/// recomputed for the physical states.
pub fn unshift(
    traj: &Trajectory,
    params: &PhysicsParams,
    ys: &DofVector,
    matrices: &SystemMatrices,
) -> Result<Trajectory> {
    if ys.len() != matrices.n {
        return Err(Error::Argument(
            "steady profile does not match the matrices".into(),
        ));
    }
    let mut out = Trajectory::with_capacity(traj.times.len().saturating_sub(1));
    for (i, t) in traj.times.iter().enumerate() {
        let decay = (-params.omega * t).exp();
        let state = DofVector {
            level: traj.states[i].level,
            values: traj.states[i]
                .values
                .iter()
                .zip(&ys.values)
                .map(|(z, y)| decay * z + y)
                .collect(),
        };
        let control = DofVector {
            level: traj.controls[i].level,
            values: traj.controls[i].values.iter().map(|u| decay * u).collect(),
        };
        let (l2, h1) = assembly::discrete_norms(matrices, &state);
        let u_l2 = matrices
            .mass
            .bilinear(&control.values, &control.values)
            .max(0.0)
            .sqrt();
        out.times.push(*t);
        out.states.push(state);
        out.controls.push(control);
        out.l2_norms.push(l2);
        out.h1_norms.push(h1);
        out.control_l2.push(u_l2);
    }
    out.newton_iterations = traj.newton_iterations.clone();
    out.newton_residuals = traj.newton_residuals.clone();
    Ok(out)
}

//! Feedback stabilization of the 2D viscous Burgers equation around a
//! non-constant steady state, discretized with P1 finite elements on
//! nested uniform triangulations of the unit square.
//!
//! The pipeline: shift the state by the steady profile and an exponential
//! rate `omega`, assemble the semidiscrete matrices, solve the
//! generalized algebraic Riccati equation for the feedback gain,
//! integrate the linear or nonlinear closed loop with backward Euler /
//! BDF2 (Newton for the convective term), and measure inter-level or
//! exact-solution errors together with their convergence orders.
//!
//! Each module maps onto one stage:
//!
//! - [`mesh`]: nested triangulations, P1 evaluation, prolongation
//! - [`expr`]: scalar-field expressions with symbolic derivatives
//! - [`quadrature`]: Gaussian rules on triangles
//! - [`assembly`]: mass/stiffness/convection/control matrices, the
//!   convective nonlinearity and its Jacobian, norms and projections
//! - [`steady`]: consistent forcings, the Picard steady-state solver and
//!   discrete coercivity margins
//! - [`linalg`]: dense LU/Cholesky/Schur/Lyapunov kernels
//! - [`riccati`]: the generalized CARE, feedback gain and closed-loop
//!   certificates
//! - [`timestepping`]: BDF2/Newton integration of the shifted systems
//! - [`convergence`]: errors, orders and table construction
//! - [`config`] / [`cli`]: experiment configuration and the command-line
//!   front end
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod assembly;
pub mod cli;
pub mod config;
pub mod convergence;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod report;
pub mod riccati;
pub mod sparse;
pub mod steady;
pub mod timestepping;

pub use error::{Error, Result};

//! Self-contained dense kernels for the Riccati and certificate paths:
//! LU and Cholesky factorizations, a real Schur decomposition
//! (Householder Hessenberg reduction plus Francis double-shift QR) with
//! eigenvalue reordering, Bartels-Stewart Lyapunov solves, and a
//! symmetric eigensolver for the generalized-pencil margins.
//!
//! Everything is deterministic: identical inputs produce bit-identical
//! outputs (fixed sweep orders, no randomized pivoting or shifts).

mod factor;
mod matrix;
mod schur;
mod sylvester;
mod symmetric;

pub use factor::{cholesky, lu_factor, CholeskyFactor, LuFactor};
pub use matrix::DenseMatrix;
pub use schur::{eigenvalues, reorder_schur, schur_real, spectral_abscissa, Eig, SchurForm};
pub use sylvester::solve_lyapunov;
pub use symmetric::{symmetric_eigenvalues, symmetric_pencil_eigenvalues};

//! Clock Hamiltonians, UNSAT penalties and spectral gap bounds for
//! circuit-to-Hamiltonian constructions.
//!
//! The crate is organised bottom-up: [`spectral`] holds the dense and
//! tridiagonal eigensolvers everything else is built on, [`clockham`] builds
//! clock-register operators, [`circuitham`] lifts them to full circuit
//! Hamiltonians, [`markovmap`] relates tridiagonal Hamiltonians to reversible
//! Markov chains, [`adiabatic`] sweeps interpolation schedules and [`ulg`]
//! handles unitary labeled graphs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod circuitham;
pub mod clockham;
pub mod ensembles;
pub mod error;
pub mod markovmap;
pub mod spectral;
pub mod ulg;

pub use error::{Error, Result};
pub use spectral::{
    CMatrix, EigenDecomposition, GroundState, HermitianMatrix, HermitianTridiagonal,
    SymTridiagonal, C64,
};

/// Default numerical tolerances shared across modules.
pub mod tol {
    /// Absolute Hermiticity tolerance for entries of magnitude up to 1.
    pub const HERMITIAN: f64 = 1e-12;
    /// Default eigensolver residual tolerance, relative to the operator norm.
    pub const EIG: f64 = 1e-10;
    /// Relative spacing below which eigenvalues count as degenerate.
    pub const DEGENERACY: f64 = 1e-9;
    pub const PROJECTOR: f64 = 1e-10;
    pub const UNITARY: f64 = 1e-10;
    /// Off-diagonal entries above this are treated as positive (non-stoquastic).
    pub const STOQUASTIC: f64 = 1e-12;
    /// Eigenvalue threshold used to extract projector kernels.
    pub const KERNEL: f64 = 1e-9;
}

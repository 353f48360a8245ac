//! Eigensolvers, Kronecker products and principal angles.

mod dense;
pub mod matrix;
pub mod tridiag;

pub use dense::eig_hermitian;
pub use matrix::{inner, norm, normalize, real_vec, CMatrix, HermitianMatrix, C64, ONE, ZERO};
pub use tridiag::{GaugedTridiagonal, HermitianTridiagonal, SymTridiagonal};

use crate::error::{Error, Result};
use crate::tol;

/// Largest dimension produced by [`kron`] unless a caller passes its own cap.
pub const DEFAULT_DIM_CAP: usize = 4160;

/// Ascending eigenvalues with orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
    /// `max_j ||H v_j - lambda_j v_j||_2 / ||H||_2`.
    pub residual: f64,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvectors.rows()
    }

    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.eigenvectors.column(j)
    }

    pub fn gap(&self) -> Result<f64> {
        if self.eigenvalues.len() < 2 {
            return Err(Error::GapUndefined(self.eigenvalues.len()));
        }
        Ok(self.eigenvalues[1] - self.eigenvalues[0])
    }

    /// Largest eigenvalue modulus, i.e. the spectral norm.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn ground_state(&self) -> GroundState {
        let norm = self.norm().max(1.0);
        let degenerate = self.eigenvalues.len() > 1
            && self.eigenvalues[1] - self.eigenvalues[0] <= tol::DEGENERACY * norm;
        let mut vector = self.vector(0);
        fix_phase(&mut vector);
        GroundState {
            energy: self.eigenvalues[0],
            vector,
            degenerate,
        }
    }
}

/// Lowest eigenpair. When `degenerate` is set the vector is one representative
/// of the ground space.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<C64>,
    pub degenerate: bool,
}

/// Rotates the global phase so the largest amplitude is real and positive.
/// Ties within 1e-9 relative go to the lowest index.
pub(crate) fn fix_phase(v: &mut [C64]) {
    let max = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("maximum exists");
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[pivot] = C64::new(v[pivot].norm(), 0.0);
}

pub fn spectral_gap(h: &HermitianMatrix) -> Result<f64> {
    if h.dim() < 2 {
        return Err(Error::GapUndefined(h.dim()));
    }
    eig_hermitian(h, tol::EIG)?.gap()
}

pub fn ground_state(h: &HermitianMatrix) -> Result<GroundState> {
    Ok(eig_hermitian(h, tol::EIG)?.ground_state())
}

pub fn eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    Ok(eig_hermitian(h, tol::EIG)?.eigenvalues)
}

/// Kronecker product, rejected when the result would exceed `cap` rows.
pub fn kron_capped(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    cap: usize,
) -> Result<HermitianMatrix> {
    let dim = a.dim().checked_mul(b.dim()).ok_or(Error::CapExceeded {
        dim: usize::MAX,
        cap,
    })?;
    if dim > cap {
        return Err(Error::CapExceeded { dim, cap });
    }
    Ok(HermitianMatrix::symmetrized(
        a.as_matrix().kron(b.as_matrix()),
    ))
}

pub fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    kron_capped(a, b, DEFAULT_DIM_CAP)
}

/// Orthonormal basis (as columns) of the range of a projector.
pub fn projector_range(p: &HermitianMatrix) -> Result<CMatrix> {
    p.ensure_projector(tol::PROJECTOR)?;
    let dec = eig_hermitian(p, tol::EIG)?;
    let cols: Vec<Vec<C64>> = dec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.5)
        .map(|(j, _)| dec.vector(j))
        .collect();
    Ok(CMatrix::from_columns(p.dim(), &cols))
}

/// Orthonormal basis of the kernel of a positive semidefinite operator,
/// keeping eigenvectors with eigenvalue at most `threshold`.
pub fn kernel_basis(h: &HermitianMatrix, threshold: f64) -> Result<CMatrix> {
    let dec = eig_hermitian(h, tol::EIG)?;
    let cols: Vec<Vec<C64>> = dec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= threshold)
        .map(|(j, _)| dec.vector(j))
        .collect();
    Ok(CMatrix::from_columns(h.dim(), &cols))
}

/// Singular values of a matrix, descending.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(Vec::new());
    }
    let gram = if m.rows() <= m.cols() {
        m.matmul(&m.adjoint())?
    } else {
        m.adjoint().matmul(m)?
    };
    let dec = eig_hermitian(&HermitianMatrix::symmetrized(gram), tol::EIG)?;
    Ok(dec
        .eigenvalues
        .iter()
        .rev()
        .map(|&v| v.max(0.0).sqrt())
        .collect())
}

/// Cosines of the principal angles between `range(P)` and `range(Q)`, descending.
pub fn principal_angles(p: &HermitianMatrix, q: &HermitianMatrix) -> Result<Vec<f64>> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let bp = projector_range(p)?;
    let bq = projector_range(q)?;
    let overlap = bp.adjoint().matmul(&bq)?;
    Ok(singular_values(&overlap)?
        .into_iter()
        .map(|c| c.min(1.0))
        .collect())
}

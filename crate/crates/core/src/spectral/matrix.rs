//! Dense complex matrices and the validated [`HermitianMatrix`] wrapper.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(CMatrix { rows, cols, data })
    }

    /// Builds a matrix from real row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        let oc = other.cols;
        for i in 0..self.rows {
            let row_out = &mut out.data[i * oc..(i + 1) * oc];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row_b = &other.data[k * oc..(k + 1) * oc];
                for (o, b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length must match column count");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Kronecker product with row-major block layout: block `(i, j)` is `self[i][j] * other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = CMatrix::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |U^dag U - I|`, the unitarity defect.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self
            .adjoint()
            .matmul(self)
            .expect("square matrices always compose");
        prod.sub(&CMatrix::identity(self.rows))
            .expect("same shape")
            .max_abs()
    }

    pub fn ensure_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_defect();
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense complex Hermitian operator.
///
/// Construction checks `H[i][j] = conj(H[j][i])` to within an absolute
/// tolerance of `1e-12` (scaled up for matrices whose entries exceed 1) and
/// then stores the exactly-Hermitian part, so downstream solvers never see
/// rounding asymmetry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianWire", into = "HermitianWire")]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows,
                found: m.cols,
            });
        }
        if m.rows == 0 {
            return Err(Error::invalid("Hermitian matrix must have dimension >= 1"));
        }
        let tol = tol::HERMITIAN * m.max_abs().max(1.0);
        let n = m.rows;
        for i in 0..n {
            for j in i..n {
                let deviation = (m[(i, j)] - m[(j, i)].conj()).norm();
                if deviation > tol {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        deviation,
                    });
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// `(M + M^dag) / 2` without validation.
    pub(crate) fn symmetrized(mut m: CMatrix) -> Self {
        let n = m.rows;
        for i in 0..n {
            m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in i + 1..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        HermitianMatrix { inner: m }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(CMatrix::from_real_rows(rows))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix {
            inner: CMatrix::identity(n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            inner: CMatrix::zeros(n, n),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        HermitianMatrix {
            inner: CMatrix::diagonal(&d),
        }
    }

    /// Rank-one projector `|v><v| / <v|v>`.
    pub fn projector(v: &[C64]) -> Result<Self> {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 == 0.0 {
            return Err(Error::invalid(
                "cannot build a projector onto the zero vector",
            ));
        }
        Ok(Self::symmetrized(
            CMatrix::outer(v, v).scale(C64::new(1.0 / norm2, 0.0)),
        ))
    }

    /// Basis projector `|i><i|` in dimension `n`.
    pub fn basis_projector(n: usize, i: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        m[(i, i)] = ONE;
        HermitianMatrix { inner: m }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(Self::symmetrized(self.inner.add(&other.inner)?))
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(Self::symmetrized(self.inner.sub(&other.inner)?))
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix {
            inner: self.inner.scale(C64::new(s, 0.0)),
        }
    }

    /// `self + s * I`.
    pub fn shift(&self, s: f64) -> HermitianMatrix {
        let mut m = self.inner.clone();
        for i in 0..m.rows {
            m[(i, i)] += s;
        }
        HermitianMatrix { inner: m }
    }

    /// `W^dag H W`.
    pub fn conjugate_by(&self, w: &CMatrix) -> Result<HermitianMatrix> {
        let hw = self.inner.matmul(w)?;
        Ok(Self::symmetrized(w.adjoint().matmul(&hw)?))
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        self.inner.mul_vec(v)
    }

    /// Expectation value `<v|H|v>` (real part).
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let hv = self.mul_vec(v);
        v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Largest off-diagonal entry modulus outside the band `|i - j| <= 1`, with its position.
    pub fn max_outside_tridiagonal(&self) -> Option<(usize, usize, f64)> {
        let n = self.dim();
        let mut worst: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 {
                    let v = self.inner[(i, j)].norm();
                    if v > 0.0 && worst.is_none_or(|w| v > w.2) {
                        worst = Some((i, j, v));
                    }
                }
            }
        }
        worst
    }

    /// `max |P^2 - P|`.
    pub fn idempotency_defect(&self) -> f64 {
        let sq = self
            .inner
            .matmul(&self.inner)
            .expect("square matrices always compose");
        sq.sub(&self.inner).expect("same shape").max_abs()
    }

    pub fn ensure_projector(&self, tol: f64) -> Result<()> {
        let deviation = self.idempotency_defect();
        if deviation > tol {
            return Err(Error::NotProjector { deviation });
        }
        Ok(())
    }
}

/// JSON form `{dim, entries: [[re, im], ...]}` with entries in row-major order.
#[derive(Serialize, Deserialize)]
struct HermitianWire {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<HermitianWire> for HermitianMatrix {
    type Error = Error;

    fn try_from(w: HermitianWire) -> Result<Self> {
        let data = w
            .entries
            .iter()
            .map(|[re, im]| C64::new(*re, *im))
            .collect();
        HermitianMatrix::new(CMatrix::from_vec(w.dim, w.dim, data)?)
    }
}

impl From<HermitianMatrix> for HermitianWire {
    fn from(h: HermitianMatrix) -> Self {
        HermitianWire {
            dim: h.dim(),
            entries: h.inner.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// Serde helper for general complex matrices written as rows of `[re, im]` pairs.
pub mod rows_format {
    use super::{CMatrix, C64};
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        let data = rows
            .into_iter()
            .flatten()
            .map(|[re, im]| C64::new(re, im))
            .collect();
        CMatrix::from_vec(r, c, data).map_err(D::Error::custom)
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn normalize(v: &mut [C64]) {
    let n = norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

pub fn real_vec(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

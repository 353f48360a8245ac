//! Real symmetric and complex Hermitian tridiagonal matrices.
//!
//! Eigenvalues come from Sturm-count bisection and eigenvectors from inverse
//! iteration, so memory stays linear in the dimension when only a few
//! eigenpairs are requested.

use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, HermitianMatrix, C64, ZERO};
use super::{EigenDecomposition, GroundState};
use crate::error::{Error, Result};
use crate::tol;

/// Real symmetric tridiagonal matrix with `diag` of length n and `offdiag` of length n - 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TridiagWire")]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

#[derive(Deserialize)]
struct TridiagWire {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TryFrom<TridiagWire> for SymTridiagonal {
    type Error = Error;

    fn try_from(w: TridiagWire) -> Result<Self> {
        SymTridiagonal::new(w.diag, w.offdiag)
    }
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid(
                "tridiagonal matrix must have dimension >= 1",
            ));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                found: offdiag.len(),
            });
        }
        if diag.iter().chain(&offdiag).any(|x| !x.is_finite()) {
            return Err(Error::invalid("tridiagonal entries must be finite"));
        }
        Ok(SymTridiagonal { diag, offdiag })
    }

    /// Reads the tridiagonal band of a dense matrix, rejecting anything outside it
    /// or any complex entry.
    pub fn from_hermitian(h: &HermitianMatrix) -> Result<Self> {
        if let Some((row, col, _)) = h.max_outside_tridiagonal() {
            return Err(Error::NotTridiagonal { row, col });
        }
        let n = h.dim();
        let diag = (0..n).map(|i| h.get(i, i).re).collect();
        let mut offdiag = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n.saturating_sub(1) {
            let z = h.get(i + 1, i);
            if z.im.abs() > tol::HERMITIAN * (1.0 + z.re.abs()) {
                return Err(Error::invalid(
                    "tridiagonal entry has an imaginary part; gauge it first",
                ));
            }
            offdiag.push(z.re);
        }
        SymTridiagonal::new(diag, offdiag)
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn to_hermitian(&self) -> HermitianMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(self.diag[i], 0.0);
        }
        for (i, &e) in self.offdiag.iter().enumerate() {
            m[(i + 1, i)] = C64::new(e, 0.0);
            m[(i, i + 1)] = C64::new(e, 0.0);
        }
        HermitianMatrix::symmetrized(m)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.offdiag[i] * x[i + 1];
            y[i + 1] += self.offdiag[i] * x[i];
        }
        y
    }

    /// `self + s * I`.
    pub fn shift(&self, s: f64) -> SymTridiagonal {
        SymTridiagonal {
            diag: self.diag.iter().map(|d| d + s).collect(),
            offdiag: self.offdiag.clone(),
        }
    }

    pub fn scale(&self, s: f64) -> SymTridiagonal {
        SymTridiagonal {
            diag: self.diag.iter().map(|d| d * s).collect(),
            offdiag: self.offdiag.iter().map(|e| e * s).collect(),
        }
    }

    /// Entrywise `self + other`.
    pub fn add(&self, other: &SymTridiagonal) -> Result<SymTridiagonal> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(SymTridiagonal {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(a, b)| a + b)
                .collect(),
            offdiag: self
                .offdiag
                .iter()
                .zip(&other.offdiag)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn scale_estimate(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn pivmin(&self) -> f64 {
        let max_e2 = self.offdiag.iter().map(|e| e * e).fold(1.0, f64::max);
        f64::MIN_POSITIVE * max_e2
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        self.sturm_count_with(x, self.pivmin())
    }

    fn sturm_count_with(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.offdiag[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn kth_eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.dim(), "eigenvalue index out of range");
        let (lo, hi) = self.gershgorin();
        self.bisect(k, lo, hi)
    }

    fn bisect(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        if self.dim() == 1 {
            return self.diag[0];
        }
        let pivmin = self.pivmin();
        let scale = lo.abs().max(hi.abs());
        let abstol = f64::EPSILON * scale * 1e-2;
        // widen slightly so rounding in the Gershgorin bounds cannot exclude an end eigenvalue
        let pad = 2.0 * f64::EPSILON * scale + pivmin;
        lo -= pad;
        hi += pad;
        loop {
            let width = hi - lo;
            let bound = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + abstol;
            if width <= bound {
                break;
            }
            let mid = lo + 0.5 * width;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count_with(mid, pivmin) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        (0..self.dim()).map(|k| self.bisect(k, lo, hi)).collect()
    }

    /// Splits at negligible off-diagonals into unreduced blocks `(start, len)`.
    fn blocks(&self) -> Vec<(usize, usize)> {
        let n = self.dim();
        let mut out = Vec::new();
        let mut start = 0;
        for i in 0..n - 1 {
            let e = self.offdiag[i].abs();
            let tiny = f64::EPSILON * (self.diag[i].abs().sqrt() * self.diag[i + 1].abs().sqrt());
            if e == 0.0 || e <= tiny {
                out.push((start, i + 1 - start));
                start = i + 1;
            }
        }
        out.push((start, n - start));
        out
    }

    fn sub_block(&self, start: usize, len: usize) -> SymTridiagonal {
        SymTridiagonal {
            diag: self.diag[start..start + len].to_vec(),
            offdiag: self.offdiag[start..start + len - 1].to_vec(),
        }
    }

    /// The `k` lowest eigenpairs with real unit eigenvectors.
    pub fn lowest_real(&self, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.dim();
        let k = k.min(n);
        let mut pairs: Vec<(f64, usize, Vec<f64>)> = Vec::new();
        for (start, len) in self.blocks() {
            let block = self.sub_block(start, len);
            let (vals, vecs) = block.eigenpairs_unreduced(k.min(len));
            for (v, x) in vals.into_iter().zip(vecs) {
                let mut full = vec![0.0; n];
                full[start..start + len].copy_from_slice(&x);
                pairs.push((v, start, full));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        pairs.truncate(k);
        let vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let vecs: Vec<Vec<f64>> = pairs.into_iter().map(|p| p.2).collect();
        let residual = self.relative_residual(&vals, &vecs);
        if residual > tol::EIG {
            return Err(Error::NotConverged {
                iterations: INVERSE_ITERATIONS,
                residual,
            });
        }
        Ok((vals, vecs))
    }

    /// Full real eigendecomposition.
    pub fn eig_real(&self) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        self.lowest_real(self.dim())
    }

    /// Full decomposition in the common [`EigenDecomposition`] form.
    pub fn eig(&self, tol: f64) -> Result<EigenDecomposition> {
        self.lowest(self.dim(), tol)
    }

    /// The `k` lowest eigenpairs in [`EigenDecomposition`] form.
    pub fn lowest(&self, k: usize, tol: f64) -> Result<EigenDecomposition> {
        if !(tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        let (vals, vecs) = self.lowest_real(k)?;
        let residual = self.relative_residual(&vals, &vecs);
        if residual > tol {
            return Err(Error::NotConverged {
                iterations: INVERSE_ITERATIONS,
                residual,
            });
        }
        let cols: Vec<Vec<C64>> = vecs
            .iter()
            .map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Ok(EigenDecomposition {
            eigenvalues: vals,
            eigenvectors: CMatrix::from_columns(self.dim(), &cols),
            residual,
        })
    }

    /// Spectral gap `E1 - E0` computed from the two lowest eigenvalues only.
    pub fn spectral_gap(&self) -> Result<f64> {
        if self.dim() < 2 {
            return Err(Error::GapUndefined(self.dim()));
        }
        let (lo, hi) = self.gershgorin();
        Ok(self.bisect(1, lo, hi) - self.bisect(0, lo, hi))
    }

    /// Ground state with the largest amplitude made positive.
    pub fn ground_state(&self) -> Result<GroundState> {
        let (vals, mut vecs) = self.lowest_real(2.min(self.dim()))?;
        let norm = self.scale_estimate().max(1.0);
        let degenerate = vals.len() > 1 && vals[1] - vals[0] <= tol::DEGENERACY * norm;
        let v = vecs.swap_remove(0);
        let mut vector: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        super::fix_phase(&mut vector);
        Ok(GroundState {
            energy: vals[0],
            vector,
            degenerate,
        })
    }

    /// Ground vector from a twisted factorization at the bisected ground energy.
    ///
    /// Unlike inverse iteration this keeps small components accurate relative to
    /// their own size, which matters when ratios of amplitudes are formed (for
    /// example in the quantum-to-classical map). Requires an unreduced matrix.
    pub fn ground_state_twisted(&self) -> Result<(f64, Vec<f64>)> {
        let n = self.dim();
        if self.offdiag.contains(&0.0) {
            return Err(Error::precondition(
                "twisted factorization needs nonzero off-diagonals",
            ));
        }
        let sigma = self.kth_eigenvalue(0);
        if n == 1 {
            return Ok((sigma, vec![1.0]));
        }
        let pivmin = self.pivmin();
        let guard = |x: f64| if x.abs() < pivmin { -pivmin } else { x };
        let mut dp = vec![0.0; n];
        dp[0] = guard(self.diag[0] - sigma);
        for t in 1..n {
            let e = self.offdiag[t - 1];
            dp[t] = guard(self.diag[t] - sigma - e * e / dp[t - 1]);
        }
        let mut dm = vec![0.0; n];
        dm[n - 1] = guard(self.diag[n - 1] - sigma);
        for t in (0..n - 1).rev() {
            let e = self.offdiag[t];
            dm[t] = guard(self.diag[t] - sigma - e * e / dm[t + 1]);
        }
        let mut k = 0;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let gamma = (dp[t] + dm[t] - (self.diag[t] - sigma)).abs();
            if gamma < best {
                best = gamma;
                k = t;
            }
        }
        let mut z = vec![0.0; n];
        z[k] = 1.0;
        for t in (0..k).rev() {
            z[t] = -(self.offdiag[t] / dp[t]) * z[t + 1];
        }
        for t in k + 1..n {
            z[t] = -(self.offdiag[t - 1] / dm[t]) * z[t - 1];
        }
        let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        let big = z
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if big < 0.0 { -1.0 } else { 1.0 };
        for x in z.iter_mut() {
            *x *= sign / norm;
        }
        Ok((sigma, z))
    }

    fn relative_residual(&self, vals: &[f64], vecs: &[Vec<f64>]) -> f64 {
        let norm = self.scale_estimate();
        let mut worst: f64 = 0.0;
        for (lam, v) in vals.iter().zip(vecs) {
            let hv = self.mul_vec(v);
            let r = hv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - lam * b).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        if norm > 0.0 {
            worst / norm
        } else {
            worst
        }
    }

    /// Lowest `k` eigenpairs of an unreduced block.
    fn eigenpairs_unreduced(&self, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = self.dim();
        let (lo, hi) = self.gershgorin();
        let vals: Vec<f64> = (0..k).map(|j| self.bisect(j, lo, hi)).collect();
        if n == 1 {
            return (vals, vec![vec![1.0]]);
        }
        let scale = self.scale_estimate().max(f64::MIN_POSITIVE);
        let cluster_tol = 1e-3 * scale;
        let pertol = 10.0 * f64::EPSILON * scale;
        let mut rng = SplitMix(0x9e37_79b9_7f4a_7c15);
        let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut cluster_start = 0;
        let mut prev_shift = f64::NEG_INFINITY;
        for j in 0..k {
            let mut shift = vals[j];
            if j > 0 {
                if vals[j] - vals[j - 1] > cluster_tol {
                    cluster_start = j;
                }
                if shift - prev_shift < pertol {
                    shift = prev_shift + pertol;
                }
            }
            prev_shift = shift;
            let lu = TridiagLu::factor(self, shift, f64::EPSILON * scale);
            let mut x: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
            for _ in 0..INVERSE_ITERATIONS {
                let inf = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if inf > 0.0 {
                    x.iter_mut().for_each(|v| *v /= inf);
                }
                lu.solve(&mut x);
                for prev in &vecs[cluster_start..j] {
                    let d: f64 = prev.iter().zip(&x).map(|(a, b)| a * b).sum();
                    x.iter_mut().zip(prev).for_each(|(v, p)| *v -= d * p);
                }
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let big = x
                .iter()
                .copied()
                .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            let s = if big < 0.0 { -1.0 / norm } else { 1.0 / norm };
            x.iter_mut().for_each(|v| *v *= s);
            vecs.push(x);
        }
        (vals, vecs)
    }
}

const INVERSE_ITERATIONS: usize = 4;

/// Small deterministic generator for inverse-iteration start vectors.
struct SplitMix(u64);

impl SplitMix {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// LU factorization of `T - shift I` with partial pivoting.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &SymTridiagonal, shift: f64, tiny: f64) -> Self {
        let n = t.dim();
        let tiny = tiny.max(f64::MIN_POSITIVE);
        let mut dl = t.offdiag.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut du = t.offdiag.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() < tiny && dl[i].abs() < tiny {
                d[i] = tiny;
            }
            if d[i].abs() >= dl[i].abs() {
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1].abs() < tiny {
            d[n - 1] = tiny;
        }
        TridiagLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Hermitian tridiagonal matrix with real diagonal and complex sub-diagonal
/// `lower[t] = H[t+1][t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianTridiagonal {
    pub diag: Vec<f64>,
    pub lower: Vec<C64>,
}

/// Real form of a [`HermitianTridiagonal`] together with the diagonal phases
/// that map its eigenvectors back: `v_t = exp(i phase_t) z_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugedTridiagonal {
    pub matrix: SymTridiagonal,
    pub phases: Vec<f64>,
}

impl HermitianTridiagonal {
    pub fn new(diag: Vec<f64>, lower: Vec<C64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid(
                "tridiagonal matrix must have dimension >= 1",
            ));
        }
        if lower.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                found: lower.len(),
            });
        }
        Ok(HermitianTridiagonal { diag, lower })
    }

    pub fn from_hermitian(h: &HermitianMatrix) -> Result<Self> {
        if let Some((row, col, _)) = h.max_outside_tridiagonal() {
            return Err(Error::NotTridiagonal { row, col });
        }
        let n = h.dim();
        HermitianTridiagonal::new(
            (0..n).map(|i| h.get(i, i).re).collect(),
            (0..n - 1).map(|i| h.get(i + 1, i)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_hermitian(&self) -> HermitianMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(self.diag[i], 0.0);
        }
        for (i, &b) in self.lower.iter().enumerate() {
            m[(i + 1, i)] = b;
            m[(i, i + 1)] = b.conj();
        }
        HermitianMatrix::symmetrized(m)
    }

    /// Diagonal phase transformation making every off-diagonal real and `<= 0`.
    pub fn gauge(&self) -> GaugedTridiagonal {
        let n = self.dim();
        let mut phases = vec![0.0; n];
        for t in 0..n - 1 {
            let b = self.lower[t];
            phases[t + 1] = if b == ZERO {
                phases[t]
            } else {
                phases[t] + b.arg() - std::f64::consts::PI
            };
        }
        let matrix = SymTridiagonal {
            diag: self.diag.clone(),
            offdiag: self.lower.iter().map(|b| -b.norm()).collect(),
        };
        GaugedTridiagonal { matrix, phases }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut y: Vec<C64> = self.diag.iter().zip(v).map(|(d, x)| x * d).collect();
        for t in 0..n - 1 {
            let b = self.lower[t];
            y[t + 1] += b * v[t];
            y[t] += b.conj() * v[t + 1];
        }
        y
    }

    pub fn eig(&self, tol: f64) -> Result<EigenDecomposition> {
        let g = self.gauge();
        let mut dec = g.matrix.eig(tol)?;
        dec.eigenvectors = g.lift_matrix(&dec.eigenvectors);
        Ok(dec)
    }
}

impl GaugedTridiagonal {
    pub fn lift(&self, z: &[f64]) -> Vec<C64> {
        z.iter()
            .zip(&self.phases)
            .map(|(&x, &p)| C64::from_polar(1.0, p) * x)
            .collect()
    }

    fn lift_matrix(&self, z: &CMatrix) -> CMatrix {
        CMatrix::from_fn(z.rows(), z.cols(), |i, j| {
            z[(i, j)] * C64::from_polar(1.0, self.phases[i])
        })
    }
}

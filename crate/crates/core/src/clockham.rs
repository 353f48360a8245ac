//! Clock-register Hamiltonians: weighted tridiagonal clocks, the Metropolis
//! construction from a time distribution, endpoint-penalized Kitaev clocks and
//! the doubled S-block operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markovmap::MarkovChain;
use crate::spectral::{HermitianMatrix, HermitianTridiagonal, SymTridiagonal, C64};
use crate::tol;

/// Coefficients `a_t` (t = 0..=T) and `b_t` (t = 0..T) of a clock Hamiltonian
/// `sum a_t |t><t| + sum (b_t |t+1><t| + h.c.)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClockWeights {
    a: Vec<f64>,
    b: Vec<C64>,
    bound: f64,
}

impl ClockWeights {
    /// Weights with the normalization `|a_t|, |b_t| <= 1`.
    pub fn new(a: Vec<f64>, b: Vec<C64>) -> Result<Self> {
        Self::with_bound(a, b, 1.0)
    }

    /// Weights with a custom entry bound.
    pub fn with_bound(a: Vec<f64>, b: Vec<C64>, bound: f64) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::invalid("clock needs T >= 1"));
        }
        if a.len() != b.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: b.len() + 1,
                found: a.len(),
            });
        }
        let slack = bound * (1.0 + 1e-12);
        if let Some(t) = a.iter().position(|x| !(x.abs() <= slack)) {
            return Err(Error::invalid(format!(
                "|a_{t}| = {} exceeds the weight bound {bound}",
                a[t].abs()
            )));
        }
        if let Some(t) = b.iter().position(|x| !(x.norm() <= slack)) {
            return Err(Error::invalid(format!(
                "|b_{t}| = {} exceeds the weight bound {bound}",
                b[t].norm()
            )));
        }
        Ok(ClockWeights { a, b, bound })
    }

    pub fn real(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::new(a, b.into_iter().map(|x| C64::new(x, 0.0)).collect())
    }

    /// Kitaev's clock, the path-graph Laplacian: `a_0 = a_T = 1`, interior 2, `b = -1`.
    /// Its interior diagonal is 2, so the entry bound is 2.
    pub fn kitaev(t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::invalid("clock needs T >= 1"));
        }
        let mut a = vec![2.0; t + 1];
        a[0] = 1.0;
        a[t] = 1.0;
        Self::with_bound(a, vec![C64::new(-1.0, 0.0); t], 2.0)
    }

    /// Weights of the Metropolis Hamiltonian built from `pi`.
    pub fn metropolis(pi: &TimeDistribution) -> Self {
        let h = metropolis_hamiltonian(pi);
        ClockWeights {
            a: h.diag().to_vec(),
            b: h.offdiag().iter().map(|&x| C64::new(x, 0.0)).collect(),
            bound: 1.0,
        }
    }

    /// Weights of the weighted clock with endpoint weight 1/4 at clock length `t`.
    pub fn theorem1(t: usize) -> Result<Self> {
        let h = theorem1_matrix(t)?;
        Self::real(h.diag().to_vec(), h.offdiag().to_vec())
    }

    pub fn t(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[C64] {
        &self.b
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn to_tridiagonal(&self) -> HermitianTridiagonal {
        HermitianTridiagonal {
            diag: self.a.clone(),
            lower: self.b.clone(),
        }
    }

    /// Real gauge-equivalent form (all off-diagonals `-|b_t|`).
    pub fn gauged(&self) -> SymTridiagonal {
        self.to_tridiagonal().gauge().matrix
    }
}

/// Dense `(T+1) x (T+1)` clock Hamiltonian.
pub fn clock_hamiltonian(w: &ClockWeights) -> HermitianMatrix {
    w.to_tridiagonal().to_hermitian()
}

/// A strictly positive probability distribution over the clock states `0..=T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionWire", into = "DistributionWire")]
pub struct TimeDistribution {
    pi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionWire {
    #[serde(rename = "T")]
    t: usize,
    pi: Vec<f64>,
}

impl TryFrom<DistributionWire> for TimeDistribution {
    type Error = Error;

    fn try_from(w: DistributionWire) -> Result<Self> {
        if w.pi.len() != w.t + 1 {
            return Err(Error::DimensionMismatch {
                expected: w.t + 1,
                found: w.pi.len(),
            });
        }
        TimeDistribution::new(w.pi)
    }
}

impl From<TimeDistribution> for DistributionWire {
    fn from(d: TimeDistribution) -> Self {
        DistributionWire { t: d.t(), pi: d.pi }
    }
}

impl TimeDistribution {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.len() < 2 {
            return Err(Error::invalid(
                "distribution needs T >= 1 (at least two states)",
            ));
        }
        if let Some(t) = pi.iter().position(|p| !(*p > 0.0)) {
            return Err(Error::invalid(format!(
                "pi_{t} = {} is not positive",
                pi[t]
            )));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("distribution sums to {sum}, not 1")));
        }
        Ok(TimeDistribution { pi })
    }

    /// Normalizes positive weights into a distribution.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::invalid("weights must have a positive sum"));
        }
        Self::new(w.iter().map(|x| x / sum).collect())
    }

    pub fn uniform(t: usize) -> Result<Self> {
        Self::from_weights(&vec![1.0; t + 1])
    }

    pub fn t(&self) -> usize {
        self.pi.len() - 1
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn min(&self) -> f64 {
        self.pi.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Endpoints carry 1/4 each and the `T - 1` interior states share the other half.
///
/// Numerators are kept as integers over the common denominator `4(T-1)` and
/// converted once, so the sum is exact up to a single rounding per entry.
pub fn theorem1_distribution(t: usize) -> Result<TimeDistribution> {
    if t < 2 {
        return Err(Error::invalid("this distribution needs T >= 2"));
    }
    let den = 4 * (t as u64 - 1);
    let corner = t as u64 - 1;
    let mut num = vec![2u64; t + 1];
    num[0] = corner;
    num[t] = corner;
    debug_assert_eq!(num.iter().sum::<u64>(), den);
    Ok(TimeDistribution {
        pi: num.iter().map(|&n| n as f64 / den as f64).collect(),
    })
}

/// Metropolis chain: `P[t][t±1] = min(1, pi[t±1] / pi[t]) / 4`, remainder on the diagonal.
pub fn metropolis_chain(pi: &TimeDistribution) -> MarkovChain {
    let p = pi.pi();
    let n = p.len();
    let mut m = vec![vec![0.0; n]; n];
    for t in 0..n {
        let mut out = 0.0;
        if t > 0 {
            m[t][t - 1] = 0.25 * (p[t - 1] / p[t]).min(1.0);
            out += m[t][t - 1];
        }
        if t + 1 < n {
            m[t][t + 1] = 0.25 * (p[t + 1] / p[t]).min(1.0);
            out += m[t][t + 1];
        }
        m[t][t] = 1.0 - out;
    }
    MarkovChain::from_parts(m, p.to_vec())
}

/// `H = I - A` with `A = pi^{1/2} P pi^{-1/2}` for the Metropolis chain of `pi`.
/// Frustration-free with ground state `sqrt(pi)`.
pub fn metropolis_hamiltonian(pi: &TimeDistribution) -> SymTridiagonal {
    let p = pi.pi();
    let n = p.len();
    let up: Vec<f64> = (0..n - 1)
        .map(|t| 0.25 * (p[t + 1] / p[t]).min(1.0))
        .collect();
    let down: Vec<f64> = (0..n - 1)
        .map(|t| 0.25 * (p[t] / p[t + 1]).min(1.0))
        .collect();
    let mut diag = vec![0.0; n];
    for t in 0..n - 1 {
        diag[t] += up[t];
        diag[t + 1] += down[t];
    }
    let offdiag = up.iter().zip(&down).map(|(u, d)| -(u * d).sqrt()).collect();
    SymTridiagonal::new(diag, offdiag).expect("lengths agree by construction")
}

/// The explicit `(T+1) x (T+1)` matrix of the frustration-free construction:
/// one half times a matrix with corner diagonals `1/(T-1)`, interior diagonal 1,
/// corner off-diagonals `-1/sqrt(2T-2)` and interior off-diagonals `-1/2`.
pub fn theorem1_matrix(t: usize) -> Result<SymTridiagonal> {
    if t < 2 {
        return Err(Error::invalid("this construction needs T >= 2"));
    }
    let tm1 = (t - 1) as f64;
    let mut diag = vec![0.5; t + 1];
    diag[0] = 0.5 / tm1;
    diag[t] = 0.5 / tm1;
    let mut off = vec![-0.25; t];
    let corner = -0.5 / (2.0 * tm1).sqrt();
    off[0] = corner;
    off[t - 1] = corner;
    SymTridiagonal::new(diag, off)
}

/// Path-graph Laplacian on `T + 1` sites.
pub fn kitaev_clock(t: usize) -> Result<SymTridiagonal> {
    Ok(ClockWeights::kitaev(t)?.gauged())
}

/// Kitaev clock plus `|0><0| + |T><T|`, i.e. `tridiag(-1, 2, -1)` on `T + 1` sites.
pub fn endpoint_penalized_clock(t: usize) -> Result<SymTridiagonal> {
    if t == 0 {
        return Err(Error::invalid("clock needs T >= 1"));
    }
    SymTridiagonal::new(vec![2.0; t + 1], vec![-1.0; t])
}

/// Closed-form ground energy of [`endpoint_penalized_clock`]: `2(1 - cos(pi/(T+2)))`.
pub fn endpoint_penalized_energy(t: usize) -> f64 {
    2.0 * (1.0 - (std::f64::consts::PI / (t as f64 + 2.0)).cos())
}

/// Variational lower bound `min_t <t|H phi> / phi_t` for a stoquastic `H` and a
/// positive trial vector `phi`.
pub fn stoquastic_lower_bound(h: &HermitianMatrix, phi: &[f64]) -> Result<f64> {
    let n = h.dim();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: phi.len(),
        });
    }
    check_positive(phi)?;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let z = h.get(i, j);
            if z.re > tol::STOQUASTIC || z.im.abs() > tol::STOQUASTIC {
                return Err(Error::NotStoquastic {
                    row: i,
                    col: j,
                    value: if z.im.abs() > tol::STOQUASTIC {
                        z.norm()
                    } else {
                        z.re
                    },
                });
            }
        }
    }
    let mut best = f64::INFINITY;
    for (i, &p) in phi.iter().enumerate() {
        let row: f64 = (0..n).map(|j| h.get(i, j).re * phi[j]).sum();
        best = best.min(row / p);
    }
    Ok(best)
}

/// Tridiagonal version of [`stoquastic_lower_bound`], linear in the dimension.
pub fn stoquastic_lower_bound_tridiagonal(h: &SymTridiagonal, phi: &[f64]) -> Result<f64> {
    if phi.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: phi.len(),
        });
    }
    check_positive(phi)?;
    if let Some(i) = h.offdiag().iter().position(|&e| e > tol::STOQUASTIC) {
        return Err(Error::NotStoquastic {
            row: i + 1,
            col: i,
            value: h.offdiag()[i],
        });
    }
    Ok(h.mul_vec(phi)
        .iter()
        .zip(phi)
        .map(|(hp, p)| hp / p)
        .fold(f64::INFINITY, f64::min))
}

fn check_positive(phi: &[f64]) -> Result<()> {
    if let Some(t) = phi.iter().position(|p| !(*p > 0.0)) {
        return Err(Error::invalid(format!(
            "trial vector entry {t} = {} is not positive",
            phi[t]
        )));
    }
    Ok(())
}

/// Sine trial state `sin(pi (t+1) / (T+2))` for the endpoint-penalized clock.
pub fn dirichlet_ansatz(t: usize) -> Vec<f64> {
    let w = std::f64::consts::PI / (t as f64 + 2.0);
    (0..=t).map(|i| (w * (i as f64 + 1.0)).sin()).collect()
}

/// Parameters of the doubled clock block with coupling `L = mu [ |1><1| + eta^2 |0><0| - eta (|0><1| + |1><0|) ]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SBlockParams {
    #[serde(rename = "T")]
    pub t: usize,
    pub mu: f64,
    pub eta: f64,
}

impl SBlockParams {
    pub fn new(t: usize, mu: f64, eta: f64) -> Result<Self> {
        if t == 0 {
            return Err(Error::invalid("S-block needs T >= 1"));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::invalid(format!("mu = {mu} must lie in [0, 1]")));
        }
        if !(eta >= 0.0) {
            return Err(Error::invalid(format!("eta = {eta} must be non-negative")));
        }
        Ok(SBlockParams { t, mu, eta })
    }

    /// Sites per copy, `N = T + 1`.
    pub fn sites(&self) -> usize {
        self.t + 1
    }

    /// Whether `(mu, eta)` lies in the regime `mu >= 1 - eps`, `eta <= sqrt(eps / 2)`.
    pub fn admissible(&self, eps: f64) -> bool {
        self.mu >= 1.0 - eps && self.eta <= (eps / 2.0).sqrt()
    }
}

/// `(I_2 ⊗ Δ) + |0><0| ⊗ |0><0| + L ⊗ |T><T|` in the canonical ordering: copy 0
/// at times `0..=T`, then copy 1 at times `T..=0` (reversed), which makes the
/// operator tridiagonal.
pub fn s_block_tridiagonal(p: &SBlockParams) -> SymTridiagonal {
    let n = p.sites();
    let mut diag = vec![2.0; 2 * n];
    let mut off = vec![-1.0; 2 * n - 1];
    // copy 0: |0><0| penalty at t = 0 and mu eta^2 at t = T
    diag[0] = 2.0;
    diag[n - 1] = 1.0 + p.mu * p.eta * p.eta;
    // copy 1 reversed: mu at t = T, free end at t = 0
    diag[n] = 1.0 + p.mu;
    diag[2 * n - 1] = 1.0;
    off[n - 1] = -p.mu * p.eta;
    SymTridiagonal::new(diag, off).expect("lengths agree by construction")
}

pub fn s_block(p: &SBlockParams) -> HermitianMatrix {
    s_block_tridiagonal(p).to_hermitian()
}

/// Half-sine trial state on both copies: entry `i` (1-based within a copy) is
/// `sin(pi i / (2N))`.
pub fn s_block_ansatz(p: &SBlockParams) -> Vec<f64> {
    let n = p.sites();
    let w = std::f64::consts::PI / (2.0 * n as f64);
    let half: Vec<f64> = (1..=n).map(|i| (w * i as f64).sin()).collect();
    half.iter().chain(&half).copied().collect()
}

/// The five distinct values of `<t|S phi> / phi_t` for the half-sine ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiveCases {
    /// First site of copy 0.
    pub first: f64,
    /// Every interior site of either copy.
    pub interior: f64,
    /// Last site of copy 0 (time T).
    pub coupled_first: f64,
    /// First site of the reversed copy 1 (time T).
    pub coupled_second: f64,
    /// Last site overall (copy 1 at time 0).
    pub last: f64,
}

impl FiveCases {
    pub fn min(&self) -> f64 {
        [
            self.first,
            self.interior,
            self.coupled_first,
            self.coupled_second,
            self.last,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

/// Closed forms of the five cases, with `N = T + 1` sites per copy.
pub fn s_block_case_closed_forms(p: &SBlockParams) -> FiveCases {
    let nf = p.sites() as f64;
    let x = std::f64::consts::PI / (2.0 * nf);
    let (mu, eta) = (p.mu, p.eta);
    FiveCases {
        first: (2.0 * x.sin() - (2.0 * x).sin()) / x.sin(),
        interior: 4.0 * (x / 2.0).sin().powi(2),
        coupled_first: eta * eta * mu - eta * mu * x.sin() - x.cos() + 1.0,
        coupled_second: mu - eta * mu / x.sin() - 2.0 * x.cos() + 1.0,
        last: 1.0 - ((nf - 1.0) * x).sin(),
    }
}

/// The five cases evaluated numerically from the matrix and the ansatz.
/// Requires at least three sites per copy so every case is distinct.
pub fn s_block_case_values(p: &SBlockParams) -> Result<FiveCases> {
    let n = p.sites();
    if n < 3 {
        return Err(Error::invalid("five distinct cases need T >= 2"));
    }
    let s = s_block_tridiagonal(p);
    let phi = s_block_ansatz(p);
    let r: Vec<f64> = s
        .mul_vec(&phi)
        .iter()
        .zip(&phi)
        .map(|(a, b)| a / b)
        .collect();
    let interior = r[1..n - 1]
        .iter()
        .chain(&r[n + 1..2 * n - 1])
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(FiveCases {
        first: r[0],
        interior,
        coupled_first: r[n - 1],
        coupled_second: r[n],
        last: r[2 * n - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{eig_hermitian, ground_state};
    use proptest::prelude::*;

    #[test]
    fn two_site_clock() {
        let w = ClockWeights::real(vec![1.0, 1.0], vec![-1.0]).unwrap();
        let h = clock_hamiltonian(&w);
        assert_eq!(
            h,
            HermitianMatrix::from_real_rows(&[&[1.0, -1.0], &[-1.0, 1.0]]).unwrap()
        );
    }

    #[test]
    fn kitaev_three_sites() {
        let h = clock_hamiltonian(&ClockWeights::kitaev(2).unwrap());
        let want = HermitianMatrix::from_real_rows(&[
            &[1.0, -1.0, 0.0],
            &[-1.0, 2.0, -1.0],
            &[0.0, -1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(h, want);
    }

    #[test]
    fn complex_weight_matches_real_gauge() {
        let w = ClockWeights::new(vec![1.0, 1.0], vec![C64::new(0.0, 1.0)]).unwrap();
        let h = clock_hamiltonian(&w);
        let vals = eig_hermitian(&h, 1e-10).unwrap().eigenvalues;
        let real = w.gauged().eigenvalues();
        for (a, b) in vals.iter().zip(&real) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn weight_bound_enforced() {
        assert!(ClockWeights::real(vec![1.5, 0.0], vec![0.0]).is_err());
        assert!(ClockWeights::new(vec![0.0, 0.0], vec![C64::new(0.8, 0.8)]).is_err());
        assert!(ClockWeights::real(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn metropolis_uniform_three_states() {
        let pi = TimeDistribution::uniform(2).unwrap();
        let mc = metropolis_chain(&pi);
        assert_eq!(mc.p(0, 1), 0.25);
        assert_eq!(mc.p(0, 0), 0.75);
        assert_eq!(mc.p(1, 1), 0.5);
        let g = metropolis_hamiltonian(&pi).ground_state().unwrap();
        assert!(g.energy.abs() < 1e-15);
        for z in &g.vector {
            assert!((z.re - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn metropolis_peaked() {
        let pi = TimeDistribution::new(vec![0.25, 0.5, 0.25]).unwrap();
        let mc = metropolis_chain(&pi);
        assert_eq!(mc.p(0, 1), 0.25);
        assert_eq!(mc.p(1, 0), 0.125);
    }

    #[test]
    fn metropolis_two_states() {
        let h = metropolis_hamiltonian(&TimeDistribution::uniform(1).unwrap());
        assert_eq!(h.diag(), &[0.25, 0.25]);
        assert_eq!(h.offdiag(), &[-0.25]);
    }

    #[test]
    fn theorem1_distribution_values() {
        assert_eq!(theorem1_distribution(3).unwrap().pi(), &[0.25; 4]);
        assert_eq!(
            theorem1_distribution(5).unwrap().pi(),
            &[0.25, 0.125, 0.125, 0.125, 0.125, 0.25]
        );
        assert!(theorem1_distribution(1).is_err());
        for t in [2, 7, 100, 1001] {
            let s: f64 = theorem1_distribution(t).unwrap().pi().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn theorem1_matrix_small() {
        let m = theorem1_matrix(3).unwrap();
        assert_eq!(m.diag(), &[0.25, 0.5, 0.5, 0.25]);
        assert_eq!(m.offdiag(), &[-0.25, -0.25, -0.25]);
        let met = metropolis_hamiltonian(&theorem1_distribution(3).unwrap());
        assert_eq!(m, met);
        assert!(theorem1_matrix(1).is_err());
    }

    #[test]
    fn theorem1_matrix_matches_metropolis() {
        for t in [3, 4, 10, 57, 400] {
            let m = theorem1_matrix(t).unwrap();
            let met = metropolis_hamiltonian(&theorem1_distribution(t).unwrap());
            for (a, b) in m.diag().iter().zip(met.diag()) {
                assert!((a - b).abs() < 1e-12);
            }
            for (a, b) in m.offdiag().iter().zip(met.offdiag()) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(m.kth_eigenvalue(0).abs() < 1e-10);
        }
    }

    #[test]
    fn endpoint_penalized_examples() {
        let h = endpoint_penalized_clock(2).unwrap();
        assert!((h.kth_eigenvalue(0) - (2.0 - 2f64.sqrt())).abs() < 1e-14);
        let v = endpoint_penalized_clock(1).unwrap().eigenvalues();
        assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] - 3.0).abs() < 1e-14);
        let e = endpoint_penalized_clock(100).unwrap().kth_eigenvalue(0) * 102f64.powi(2);
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((e - pi2).abs() / pi2 < 0.05);
    }

    #[test]
    fn dirichlet_ansatz_is_exact() {
        for t in [1, 5, 30] {
            let h = endpoint_penalized_clock(t).unwrap();
            let lb = stoquastic_lower_bound(&h.to_hermitian(), &dirichlet_ansatz(t)).unwrap();
            assert!((lb - endpoint_penalized_energy(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn stoquastic_bound_edge_cases() {
        assert_eq!(
            stoquastic_lower_bound(&HermitianMatrix::zeros(3), &[1.0, 2.0, 3.0]).unwrap(),
            0.0
        );
        let bad = HermitianMatrix::from_real_rows(&[&[1.0, 0.5], &[0.5, 1.0]]).unwrap();
        assert!(matches!(
            stoquastic_lower_bound(&bad, &[1.0, 1.0]),
            Err(Error::NotStoquastic { .. })
        ));
        let ok = HermitianMatrix::identity(2);
        assert!(stoquastic_lower_bound(&ok, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn s_block_matches_eight_dim_layout() {
        let (mu, eta) = (0.9, 0.2);
        let s = s_block(&SBlockParams::new(3, mu, eta).unwrap());
        let want: [[f64; 8]; 8] = [
            [2.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [-1.0, 2.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 2.0, -1.0, 0.0, 0.0, 0.0, 0.0],
            [
                0.0,
                0.0,
                -1.0,
                mu * eta * eta + 1.0,
                -mu * eta,
                0.0,
                0.0,
                0.0,
            ],
            [0.0, 0.0, 0.0, -mu * eta, 1.0 + mu, -1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -1.0, 2.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 2.0, -1.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 1.0],
        ];
        for (i, row) in want.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                assert_eq!(s.get(i, j).re, w, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn s_block_decouples_without_eta() {
        let p = SBlockParams::new(5, 1.0, 0.0).unwrap();
        let s = s_block_tridiagonal(&p);
        assert_eq!(s.offdiag()[5], 0.0);
        // each copy is a path penalized at one end only
        assert_eq!(&s.diag()[..6], &[2.0, 2.0, 2.0, 2.0, 2.0, 1.0]);
        assert_eq!(&s.diag()[6..], &[2.0, 2.0, 2.0, 2.0, 2.0, 1.0]);
        let e0 = s.kth_eigenvalue(0);
        let want = 2.0 - 2.0 * (std::f64::consts::PI / 13.0).cos();
        assert!((e0 - want).abs() < 1e-14);
    }

    #[test]
    fn s_block_case_values_match_closed_forms() {
        for t in [10, 100] {
            let p = SBlockParams::new(t, 0.95, 0.1).unwrap();
            let a = s_block_case_values(&p).unwrap();
            let b = s_block_case_closed_forms(&p);
            assert!((a.first - b.first).abs() < 1e-10);
            assert!((a.interior - b.interior).abs() < 1e-10);
            assert!((a.coupled_first - b.coupled_first).abs() < 1e-10);
            assert!((a.coupled_second - b.coupled_second).abs() < 1e-10);
            assert!((a.last - b.last).abs() < 1e-10);
        }
    }

    #[test]
    fn s_block_ansatz_certifies_only_the_decoupled_case() {
        let t = 50;
        let clean = SBlockParams::new(t, 1.0, 0.0).unwrap();
        let lb = s_block_case_values(&clean).unwrap().min();
        assert!(lb > 0.0 && lb * (t as f64).powi(2) > 0.5);
        // any positive coupling makes the time-T case of copy 1 negative at this length
        let coupled = SBlockParams::new(t, 0.99, 0.05).unwrap();
        assert!(s_block_case_values(&coupled).unwrap().coupled_second < 0.0);
        // while the true ground energy stays of order T^-2
        let e0 = s_block_tridiagonal(&coupled).kth_eigenvalue(0);
        assert!(e0 * (t as f64).powi(2) > 0.5);
    }

    #[test]
    fn distribution_json() {
        let d: TimeDistribution = serde_json::from_str(r#"{"T":1,"pi":[0.5,0.5]}"#).unwrap();
        assert_eq!(d.t(), 1);
        assert!(serde_json::from_str::<TimeDistribution>(r#"{"T":2,"pi":[0.5,0.5]}"#).is_err());
        assert!(serde_json::from_str::<TimeDistribution>(r#"{"T":1,"pi":[0.7,0.5]}"#).is_err());
    }

    #[test]
    fn dense_and_tridiagonal_stoquastic_bounds_agree() {
        let p = SBlockParams::new(6, 0.97, 0.1).unwrap();
        let phi = s_block_ansatz(&p);
        let a = stoquastic_lower_bound(&s_block(&p), &phi).unwrap();
        let b = stoquastic_lower_bound_tridiagonal(&s_block_tridiagonal(&p), &phi).unwrap();
        assert!((a - b).abs() < 1e-14);
        let e0 = ground_state(&s_block(&p)).unwrap().energy;
        assert!(a <= e0 + 1e-10);
    }

    fn distribution(max_t: usize) -> impl Strategy<Value = TimeDistribution> {
        (1..=max_t)
            .prop_flat_map(|t| prop::collection::vec(0.1f64..1.0, t + 1))
            .prop_map(|w| TimeDistribution::from_weights(&w).unwrap())
    }

    proptest! {
        #[test]
        fn metropolis_is_frustration_free(pi in distribution(60)) {
            let h = metropolis_hamiltonian(&pi);
            let g = h.ground_state().unwrap();
            prop_assert!(g.energy.abs() < 1e-10);
            for (z, p) in g.vector.iter().zip(pi.pi()) {
                prop_assert!((z.re - p.sqrt()).abs() < 1e-8);
            }
            prop_assert!(h.offdiag().iter().all(|&e| e <= 0.0));
            let mc = metropolis_chain(&pi);
            for t in 0..=pi.t() {
                prop_assert!(mc.p(t, t) >= 0.5);
            }
        }

        #[test]
        fn stoquastic_bound_never_exceeds_ground_energy(
            pi in distribution(30),
            phi_seed in prop::collection::vec(0.05f64..1.0, 31),
        ) {
            let h = metropolis_hamiltonian(&pi).add(&endpoint_penalized_clock(pi.t()).unwrap().scale(0.1)).unwrap();
            let phi = &phi_seed[..h.dim()];
            let lb = stoquastic_lower_bound_tridiagonal(&h, phi).unwrap();
            prop_assert!(lb <= h.kth_eigenvalue(0) + 1e-10);
        }
    }
}

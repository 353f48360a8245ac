//! Reversible Markov chains and the map from tridiagonal Hamiltonians to
//! birth-death chains.

use serde::{Deserialize, Serialize};

use crate::clockham::ClockWeights;
use crate::error::{Error, Result};
use crate::spectral::{
    eig_hermitian, CMatrix, HermitianMatrix, HermitianTridiagonal, SymTridiagonal, C64,
};
use crate::tol;

/// Row-stochastic transition matrix on states `0..=T` with its stationary distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainWire", into = "ChainWire")]
pub struct MarkovChain {
    n: usize,
    p: Vec<f64>,
    pi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ChainWire {
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    pi: Vec<f64>,
}

impl TryFrom<ChainWire> for MarkovChain {
    type Error = Error;

    fn try_from(w: ChainWire) -> Result<Self> {
        MarkovChain::new(w.p, w.pi)
    }
}

impl From<MarkovChain> for ChainWire {
    fn from(c: MarkovChain) -> Self {
        ChainWire {
            p: c.rows(),
            pi: c.pi,
        }
    }
}

impl MarkovChain {
    /// Validates stochasticity (rows within 1e-10, entries `>= -1e-12`) and
    /// detailed balance against `pi` (within 1e-9).
    pub fn new(p: Vec<Vec<f64>>, pi: Vec<f64>) -> Result<Self> {
        let n = p.len();
        if n == 0 {
            return Err(Error::invalid("Markov chain needs at least one state"));
        }
        if pi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: pi.len(),
            });
        }
        for (i, row) in p.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|&x| !(x >= -1e-12)) {
                return Err(Error::invalid(format!(
                    "P[{i}][{j}] = {} is negative",
                    row[j]
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-10 {
                return Err(Error::invalid(format!("row {i} sums to {s}")));
            }
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-10 || pi.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::invalid(
                "stationary distribution must be non-negative and sum to 1",
            ));
        }
        let chain = Self::from_parts(p, pi);
        let defect = chain.detailed_balance_defect();
        if defect > 1e-9 {
            return Err(Error::invalid(format!(
                "chain violates detailed balance by {defect:.3e}"
            )));
        }
        Ok(chain)
    }

    pub(crate) fn from_parts(p: Vec<Vec<f64>>, pi: Vec<f64>) -> Self {
        let n = p.len();
        MarkovChain {
            n,
            p: p.into_iter().flatten().collect(),
            pi,
        }
    }

    pub fn states(&self) -> usize {
        self.n
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.p.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// `max |sum_j P[i][j] - 1|`.
    pub fn stochasticity_defect(&self) -> f64 {
        self.p
            .chunks(self.n)
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Most negative entry (0 when all entries are non-negative).
    pub fn min_entry(&self) -> f64 {
        self.p.iter().copied().fold(0.0, f64::min)
    }

    /// `max |pi_i P[i][j] - pi_j P[j][i]|`.
    pub fn detailed_balance_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.pi[i] * self.p(i, j) - self.pi[j] * self.p(j, i)).abs());
            }
        }
        worst
    }

    /// `max |(pi P)_j - pi_j|`.
    pub fn stationarity_defect(&self) -> f64 {
        (0..self.n)
            .map(|j| {
                let s: f64 = (0..self.n).map(|i| self.pi[i] * self.p(i, j)).sum();
                (s - self.pi[j]).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_birth_death(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i.abs_diff(j) <= 1 || self.p(i, j) == 0.0))
    }

    /// Symmetrized `I - pi^{1/2} P pi^{-1/2}` for a birth-death chain.
    fn symmetrized_generator(&self) -> SymTridiagonal {
        let n = self.n;
        let diag = (0..n).map(|t| 1.0 - self.p(t, t)).collect();
        let off = (0..n - 1)
            .map(|t| -(self.p(t, t + 1) * self.p(t + 1, t)).sqrt())
            .collect();
        SymTridiagonal::new(diag, off).expect("lengths agree by construction")
    }

    /// All eigenvalues of `P`, descending. Uses the reversible symmetrization.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut vals = if self.is_birth_death() {
            self.symmetrized_generator().eigenvalues()
        } else {
            let n = self.n;
            let m = CMatrix::from_fn(n, n, |i, j| {
                let d = if i == j { 1.0 } else { 0.0 };
                C64::new(d - (self.p(i, j) * self.p(j, i)).sqrt(), 0.0)
            });
            eig_hermitian(&HermitianMatrix::new(m)?, tol::EIG)?.eigenvalues
        };
        for v in vals.iter_mut() {
            *v = 1.0 - *v;
        }
        Ok(vals)
    }

    /// `Δ_P = λ_max - λ_second`.
    pub fn spectral_gap(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::GapUndefined(self.n));
        }
        if self.is_birth_death() {
            return self.symmetrized_generator().spectral_gap();
        }
        let vals = self.eigenvalues()?;
        Ok(vals[0] - vals[1])
    }

    fn flow(&self, i: usize, j: usize) -> f64 {
        self.pi[i] * self.p(i, j)
    }
}

/// Which subsets the conductance minimum ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutStrategy {
    /// Every nonempty proper subset; limited to `T <= 20`.
    Exact,
    /// Contiguous intervals `{i..=j}`; exact for birth-death chains.
    Interval,
}

pub const EXACT_CONDUCTANCE_MAX_T: usize = 20;

/// `Φ = min_S Q(S, S^c) / min(π(S), π(S^c))`.
pub fn conductance(mc: &MarkovChain, strategy: CutStrategy) -> Result<f64> {
    let n = mc.states();
    if n < 2 {
        return Err(Error::invalid("conductance needs at least two states"));
    }
    match strategy {
        CutStrategy::Interval => Ok(interval_conductance(mc)),
        CutStrategy::Exact => {
            if n - 1 > EXACT_CONDUCTANCE_MAX_T {
                return Err(Error::CapExceeded {
                    dim: n - 1,
                    cap: EXACT_CONDUCTANCE_MAX_T,
                });
            }
            Ok(exact_conductance(mc))
        }
    }
}

fn interval_conductance(mc: &MarkovChain) -> f64 {
    let n = mc.states();
    // cum[i] = π([0, i)), suf[i] = π([i, n)); tail masses can be far below
    // machine epsilon, so neither side is formed as 1 - (other side)
    let mut cum = vec![0.0; n + 1];
    let mut suf = vec![0.0; n + 1];
    for i in 0..n {
        cum[i + 1] = cum[i] + mc.pi[i];
        suf[n - 1 - i] = suf[n - i] + mc.pi[n - 1 - i];
    }
    let bd = mc.is_birth_death();
    let prefix = if bd { Vec::new() } else { flow_prefix(mc) };
    let block = |r0: usize, r1: usize, c0: usize, c1: usize| -> f64 {
        let w = n + 1;
        prefix[r1 * w + c1] - prefix[r0 * w + c1] - prefix[r1 * w + c0] + prefix[r0 * w + c0]
    };
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let inside = if cum[j + 1] <= suf[i] {
                cum[j + 1] - cum[i]
            } else {
                suf[i] - suf[j + 1]
            };
            let outside = cum[i] + suf[j + 1];
            let denom = inside.min(outside);
            let q = if bd {
                let left = if i > 0 { mc.flow(i, i - 1) } else { 0.0 };
                let right = if j + 1 < n { mc.flow(j, j + 1) } else { 0.0 };
                left + right
            } else {
                block(i, j + 1, 0, n) - block(i, j + 1, i, j + 1)
            };
            if denom > 0.0 {
                best = best.min(q / denom);
            }
        }
    }
    best
}

fn flow_prefix(mc: &MarkovChain) -> Vec<f64> {
    let n = mc.states();
    let w = n + 1;
    let mut s = vec![0.0; w * w];
    for i in 0..n {
        for j in 0..n {
            s[(i + 1) * w + j + 1] =
                mc.flow(i, j) + s[i * w + j + 1] + s[(i + 1) * w + j] - s[i * w + j];
        }
    }
    s
}

fn exact_conductance(mc: &MarkovChain) -> f64 {
    let n = mc.states();
    let full: u32 = (1u32 << n) - 1;
    let bd = mc.is_birth_death();
    let mut best = f64::INFINITY;
    let mut set: u32 = 0;
    let mut q = 0.0;
    // Gray-code walk: consecutive subsets differ in one state
    for step in 1..=full {
        let v = step.trailing_zeros() as usize;
        let bit = 1u32 << v;
        if !bd {
            let adding = set & bit == 0;
            let mut into_v = 0.0;
            let mut out_of_v = 0.0;
            for u in 0..n {
                if u == v {
                    continue;
                }
                if set & (1 << u) != 0 {
                    into_v += mc.flow(u, v);
                } else {
                    out_of_v += mc.flow(v, u);
                }
            }
            if adding {
                q += out_of_v - into_v;
            } else {
                q += into_v - out_of_v;
            }
        }
        set ^= bit;
        if set == full || set == 0 {
            continue;
        }
        // masses (and birth-death flows) from scratch: running sums lose
        // exponentially small tails
        let (mut inside, mut outside) = (0.0, 0.0);
        for k in 0..n {
            if set & (1 << k) != 0 {
                inside += mc.pi[k];
            } else {
                outside += mc.pi[k];
            }
        }
        if bd {
            q = (0..n - 1)
                .map(|k| match ((set >> k) & 1, (set >> (k + 1)) & 1) {
                    (1, 0) => mc.flow(k, k + 1),
                    (0, 1) => mc.flow(k + 1, k),
                    _ => 0.0,
                })
                .sum();
        }
        let denom = f64::min(inside, outside);
        if denom > 0.0 {
            best = best.min(q / denom);
        }
    }
    best
}

/// `(Φ²/2, 2Φ)`.
pub fn cheeger_bounds(phi: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::invalid(format!("conductance {phi} outside [0, 1]")));
    }
    Ok((phi * phi / 2.0, 2.0 * phi))
}

#[derive(Clone, Debug, Serialize)]
pub struct CheegerReport {
    pub conductance: f64,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub holds: bool,
}

pub fn cheeger_check(mc: &MarkovChain, strategy: CutStrategy) -> Result<CheegerReport> {
    let phi = conductance(mc, strategy)?;
    let (lower, upper) = cheeger_bounds(phi.min(1.0))?;
    let gap = mc.spectral_gap()?;
    Ok(CheegerReport {
        conductance: phi,
        lower,
        upper,
        gap,
        holds: lower <= gap + 1e-12 && gap <= upper + 1e-12,
    })
}

/// Output of the quantum-to-classical map for an unreduced tridiagonal Hamiltonian.
#[derive(Clone, Debug)]
pub struct QuantumClassicalMap {
    pub chain: MarkovChain,
    /// Ground energy of the input, before the shift.
    pub energy: f64,
    /// Energy offset subtracted from the input so the mapped ground energy is 0.
    pub shift: f64,
    /// Ground state of the input, phase-fixed so `psi_0` is real positive.
    pub psi: Vec<C64>,
    pub gap_h: f64,
    pub gap_p: f64,
    /// Largest imaginary part met while forming the transition probabilities.
    pub max_imaginary: f64,
}

/// Result of mapping: either a chain, or a decoupled Hamiltonian whose ground
/// space contains the orthogonal excitation.
#[derive(Clone, Debug)]
pub enum ClassicalMapping {
    Chain(Box<QuantumClassicalMap>),
    Decoupled(DecoupledReport),
}

#[derive(Clone, Debug)]
pub struct DecoupledReport {
    /// Index `t'` with `b_{t'} = 0`.
    pub cut: usize,
    pub energy: f64,
    pub gap_h: f64,
    /// The orthogonal excitation, when the ground state has weight on both sides of the cut.
    pub excitation: Option<Vec<C64>>,
}

/// Maps `H` (tridiagonal, arbitrary complex couplings) to the reversible chain
/// `P[t][t'] = psi_{t'} G[t][t'] / psi_t` with `G = I - (H - E_0)`.
///
/// The energy is shifted by the ground energy, so the mapped ground energy is
/// zero and the gaps agree exactly. The shifted diagonal must not exceed 1.
pub fn quantum_to_classical(h: &HermitianTridiagonal) -> Result<ClassicalMapping> {
    if h.dim() < 2 {
        return Err(Error::invalid("mapping needs at least two clock states"));
    }
    if let Some(cut) = h.lower.iter().position(|b| *b == C64::new(0.0, 0.0)) {
        return Ok(ClassicalMapping::Decoupled(decoupled(h, cut)?));
    }
    let gauged = h.gauge();
    let (energy, z) = gauged.matrix.ground_state_twisted()?;
    let max_a = h.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max_a - energy > 1.0 + 1e-12 {
        return Err(Error::precondition(format!(
            "shifted diagonal reaches {:.6} > 1; rescale the Hamiltonian first",
            max_a - energy
        )));
    }
    if let Some(t) = z.iter().position(|&x| x == 0.0) {
        return Err(Error::precondition(format!(
            "ground amplitude psi_{t} vanishes"
        )));
    }
    let psi = gauged.lift(&z);
    let n = h.dim();
    let mut rows = vec![vec![0.0; n]; n];
    let mut max_imaginary: f64 = 0.0;
    for t in 0..n {
        let mut entries: Vec<(usize, C64)> = vec![(t, C64::new(1.0 - (h.diag[t] - energy), 0.0))];
        if t + 1 < n {
            // G[t][t+1] = -H[t][t+1] = -conj(b_t)
            entries.push((t + 1, -h.lower[t].conj() * psi[t + 1] / psi[t]));
        }
        if t > 0 {
            entries.push((t - 1, -h.lower[t - 1] * psi[t - 1] / psi[t]));
        }
        for (j, z) in entries {
            max_imaginary = max_imaginary.max(z.im.abs());
            rows[t][j] = z.re;
        }
        clamp_row(&mut rows[t], t)?;
    }
    let pi: Vec<f64> = z.iter().map(|x| x * x).collect();
    let chain = MarkovChain::new(rows, pi)?;
    let gap_h = gauged.matrix.spectral_gap()?;
    let gap_p = chain.spectral_gap()?;
    Ok(ClassicalMapping::Chain(Box::new(QuantumClassicalMap {
        chain,
        energy,
        shift: energy,
        psi,
        gap_h,
        gap_p,
        max_imaginary,
    })))
}

/// Clamps entries in `[-1e-12, 0)` to zero and renormalizes; larger negativity is an error.
fn clamp_row(row: &mut [f64], t: usize) -> Result<()> {
    let mut touched = false;
    for (j, x) in row.iter_mut().enumerate() {
        if *x < 0.0 {
            if *x < -1e-12 {
                return Err(Error::invalid(format!(
                    "mapped P[{t}][{j}] = {x:.3e} is negative"
                )));
            }
            *x = 0.0;
            touched = true;
        }
    }
    if touched {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    Ok(())
}

fn decoupled(h: &HermitianTridiagonal, cut: usize) -> Result<DecoupledReport> {
    let dec = h.eig(tol::EIG)?;
    let g = dec.ground_state();
    let gap_h = dec.gap()?;
    let left: f64 = g.vector[..=cut].iter().map(|z| z.norm_sqr()).sum();
    let right: f64 = g.vector[cut + 1..].iter().map(|z| z.norm_sqr()).sum();
    let excitation = if left > 1e-12 && right > 1e-12 {
        Some(orthogonal_excitation(h, &g.vector, cut)?)
    } else {
        None
    };
    Ok(DecoupledReport {
        cut,
        energy: g.energy,
        gap_h,
        excitation,
    })
}

/// `psi_t / psi²([0, t'])` up to the cut and `-psi_t / psi²([t'+1, T])` after it.
/// Requires `b_{t'} = 0`.
pub fn orthogonal_excitation(
    h: &HermitianTridiagonal,
    psi: &[C64],
    tprime: usize,
) -> Result<Vec<C64>> {
    if psi.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi.len(),
        });
    }
    if tprime + 1 >= h.dim() {
        return Err(Error::invalid("cut index must be below T"));
    }
    let b = h.lower[tprime];
    if b.norm() != 0.0 {
        return Err(Error::precondition(format!("b_{tprime} = {b} is not zero")));
    }
    let left: f64 = psi[..=tprime].iter().map(|z| z.norm_sqr()).sum();
    let right: f64 = psi[tprime + 1..].iter().map(|z| z.norm_sqr()).sum();
    if left == 0.0 || right == 0.0 {
        return Err(Error::precondition(
            "psi has no weight on one side of the cut",
        ));
    }
    Ok(psi
        .iter()
        .enumerate()
        .map(|(t, z)| if t <= tprime { z / left } else { -z / right })
        .collect())
}

/// Birth-death gap characterization around the median state `i'`.
#[derive(Clone, Debug, Serialize)]
pub struct BirthDeathReport {
    pub median: usize,
    pub ell: f64,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub holds: bool,
}

/// `ℓ` = max of the two one-sided sums around `i'`, the smallest state with
/// `π([0, i']) >= 1/2`; checks `1/(2ℓ) <= Δ_P <= 4/ℓ`.
pub fn birth_death_ell(mc: &MarkovChain) -> Result<BirthDeathReport> {
    if !mc.is_birth_death() {
        let n = mc.states();
        for i in 0..n {
            for j in 0..n {
                if i.abs_diff(j) > 1 && mc.p(i, j) != 0.0 {
                    return Err(Error::NotTridiagonal { row: i, col: j });
                }
            }
        }
    }
    let n = mc.states();
    if n < 2 {
        return Err(Error::GapUndefined(n));
    }
    let pi = mc.pi();
    let mut cum = 0.0;
    let mut median = n - 1;
    for (t, p) in pi.iter().enumerate() {
        cum += p;
        if cum >= 0.5 - 1e-15 {
            median = t;
            break;
        }
    }
    let mut prefix = vec![0.0; n + 1];
    let mut suffix = vec![0.0; n + 1];
    for t in 0..n {
        prefix[t + 1] = prefix[t] + pi[t];
        suffix[n - 1 - t] = suffix[n - t] + pi[n - 1 - t];
    }

    // left branch: j <= i', sum_{k=j}^{i'-1} π([0,j]) / (π_k P_{k,k+1})
    let mut left = 0.0f64;
    let mut tail = 0.0;
    for j in (0..median).rev() {
        tail += 1.0 / (pi[j] * mc.p(j, j + 1));
        left = left.max(prefix[j + 1] * tail);
    }
    // right branch: j > i', sum_{k=i'+1}^{j} π([j,T]) / (π_k P_{k,k-1})
    let mut right = 0.0f64;
    let mut head = 0.0;
    for j in median + 1..n {
        head += 1.0 / (pi[j] * mc.p(j, j - 1));
        right = right.max(suffix[j] * head);
    }
    let ell = left.max(right);
    let gap = mc.spectral_gap()?;
    let (lower, upper) = if ell > 0.0 {
        (1.0 / (2.0 * ell), 4.0 / ell)
    } else {
        (0.0, f64::INFINITY)
    };
    Ok(BirthDeathReport {
        median,
        ell,
        lower,
        upper,
        gap,
        holds: lower <= gap * (1.0 + 1e-12) && gap <= upper * (1.0 + 1e-12),
    })
}

/// `Δ_H · min(|psi_0|², |psi_T|²)` for a clock Hamiltonian.
#[derive(Clone, Debug, Serialize)]
pub struct ProductReport {
    pub gap: f64,
    pub endpoint_weight: f64,
    pub product: f64,
    pub degenerate: bool,
}

/// Requires `|a_t|, |b_t| <= 1`. A degenerate ground state reports a zero product.
pub fn tridiag_product_bound(w: &ClockWeights) -> Result<ProductReport> {
    let bad_a = w.a().iter().any(|x| x.abs() > 1.0 + 1e-12);
    let bad_b = w.b().iter().any(|x| x.norm() > 1.0 + 1e-12);
    if bad_a || bad_b {
        return Err(Error::precondition(
            "weights must satisfy |a_t|, |b_t| <= 1",
        ));
    }
    let m = w.gauged();
    let (vals, vecs) = m.lowest_real(2)?;
    let gap = vals[1] - vals[0];
    let scale = m.gershgorin().1.abs().max(m.gershgorin().0.abs()).max(1.0);
    let degenerate = gap <= tol::DEGENERACY * scale;
    let z = &vecs[0];
    let endpoint_weight = z[0].powi(2).min(z[z.len() - 1].powi(2));
    Ok(ProductReport {
        gap,
        endpoint_weight,
        product: if degenerate {
            0.0
        } else {
            gap * endpoint_weight
        },
        degenerate,
    })
}

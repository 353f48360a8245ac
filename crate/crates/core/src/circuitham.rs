//! Circuits on a few qubits and the circuit Hamiltonians built from them:
//! propagation, Feynman-Kitaev with input/output penalties, the UNSAT penalty
//! and the geometric quantities used to bound it.

use serde::{Deserialize, Serialize};

use crate::clockham::{clock_hamiltonian, ClockWeights};
use crate::error::{Error, Result};
use crate::spectral::{
    eig_hermitian, kernel_basis, singular_values, CMatrix, HermitianMatrix, SymTridiagonal, C64,
    DEFAULT_DIM_CAP, ONE, ZERO,
};
use crate::tol;

/// Largest qubit count accepted by the dense circuit routines.
pub const DEFAULT_QUBIT_CAP: usize = 6;

/// A unitary acting on the listed qubits. Qubit 0 is the most significant bit
/// of the computational basis index, and `targets[0]` the most significant
/// bit of the gate's own index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateWire", into = "GateWire")]
pub struct Gate {
    name: Option<String>,
    unitary: CMatrix,
    targets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GateWire {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    targets: Vec<usize>,
}

impl TryFrom<GateWire> for Gate {
    type Error = Error;

    fn try_from(w: GateWire) -> Result<Self> {
        match (w.name, w.matrix) {
            (Some(name), None) => Gate::named(&name, w.targets),
            (None, Some(rows)) => {
                let r = rows.len();
                if rows.iter().any(|row| row.len() != r) {
                    return Err(Error::invalid("gate matrix must be square"));
                }
                let data = rows
                    .into_iter()
                    .flatten()
                    .map(|[re, im]| C64::new(re, im))
                    .collect();
                Gate::new(CMatrix::from_vec(r, r, data)?, w.targets)
            }
            _ => Err(Error::invalid(
                "a gate needs exactly one of `name` or `matrix`",
            )),
        }
    }
}

impl From<Gate> for GateWire {
    fn from(g: Gate) -> Self {
        let matrix = g.name.is_none().then(|| {
            (0..g.unitary.rows())
                .map(|i| {
                    (0..g.unitary.cols())
                        .map(|j| [g.unitary[(i, j)].re, g.unitary[(i, j)].im])
                        .collect()
                })
                .collect()
        });
        GateWire {
            name: g.name,
            matrix,
            targets: g.targets,
        }
    }
}

fn builtin(name: &str) -> Option<CMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    let m = match name {
        "I" => CMatrix::identity(2),
        "X" => CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        "Y" => CMatrix::from_vec(2, 2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).ok()?,
        "Z" => CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
        "H" => CMatrix::from_real_rows(&[&[r, r], &[r, -r]]),
        "S" => CMatrix::diagonal(&[ONE, c(0.0, 1.0)]),
        "T" => CMatrix::diagonal(&[ONE, c(r, r)]),
        "CNOT" => CMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]),
        _ => return None,
    };
    Some(m)
}

impl Gate {
    pub fn new(unitary: CMatrix, targets: Vec<usize>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::invalid("gate without targets"));
        }
        let mut sorted = targets.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("repeated gate target"));
        }
        let dim = 1usize
            .checked_shl(targets.len() as u32)
            .filter(|_| targets.len() <= DEFAULT_QUBIT_CAP)
            .ok_or(Error::CapExceeded {
                dim: usize::MAX,
                cap: 1 << DEFAULT_QUBIT_CAP,
            })?;
        if unitary.rows() != dim || unitary.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: unitary.rows(),
            });
        }
        unitary.ensure_unitary(tol::UNITARY)?;
        Ok(Gate {
            name: None,
            unitary,
            targets,
        })
    }

    /// One of the built-in gates `I X Y Z H S T CNOT`. `CNOT` controls on
    /// `targets[0]`.
    pub fn named(name: &str, targets: Vec<usize>) -> Result<Self> {
        let u = builtin(name).ok_or_else(|| Error::invalid(format!("unknown gate `{name}`")))?;
        let mut g = Gate::new(u, targets)?;
        g.name = Some(name.to_string());
        Ok(g)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// The gate as a `2^n x 2^n` operator.
    pub fn embed(&self, n: usize) -> CMatrix {
        let dim = 1usize << n;
        let k = self.targets.len();
        let shifts: Vec<usize> = self.targets.iter().map(|&q| n - 1 - q).collect();
        let mask: usize = shifts.iter().map(|&s| 1 << s).sum();
        let local = |idx: usize| -> usize {
            shifts
                .iter()
                .fold(0, |acc, &s| (acc << 1) | ((idx >> s) & 1))
        };
        let spread = |g: usize| -> usize {
            shifts
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &s)| acc | (((g >> (k - 1 - i)) & 1) << s))
        };
        let mut out = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let gc = local(col);
            let rest = col & !mask;
            for gr in 0..1usize << k {
                let v = self.unitary[(gr, gc)];
                if v != ZERO {
                    out[(rest | spread(gr), col)] = v;
                }
            }
        }
        out
    }
}

/// Gates `U_1, ..., U_T` on `n` qubits, applied in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitWire", into = "CircuitWire")]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

#[derive(Serialize, Deserialize)]
struct CircuitWire {
    n: usize,
    gates: Vec<Gate>,
}

impl TryFrom<CircuitWire> for Circuit {
    type Error = Error;

    fn try_from(w: CircuitWire) -> Result<Self> {
        Circuit::new(w.n, w.gates)
    }
}

impl From<Circuit> for CircuitWire {
    fn from(c: Circuit) -> Self {
        CircuitWire {
            n: c.n,
            gates: c.gates,
        }
    }
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("circuit needs at least one qubit"));
        }
        if n > DEFAULT_QUBIT_CAP {
            return Err(Error::CapExceeded {
                dim: n,
                cap: DEFAULT_QUBIT_CAP,
            });
        }
        if gates.is_empty() {
            return Err(Error::invalid("circuit needs T >= 1 gates"));
        }
        for g in &gates {
            if let Some(&q) = g.targets.iter().find(|&&q| q >= n) {
                return Err(Error::invalid(format!(
                    "target qubit {q} out of range for n = {n}"
                )));
            }
        }
        Ok(Circuit { n, gates })
    }

    /// `t` identity gates on qubit 0.
    pub fn identity(n: usize, t: usize) -> Result<Self> {
        let id = Gate::named("I", vec![0])?;
        Circuit::new(n, vec![id; t])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of gates.
    pub fn t(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// The circuit with `before` identities prepended and `after` appended.
    pub fn padded(&self, before: usize, after: usize) -> Circuit {
        let id = Gate::named("I", vec![0]).expect("built-in gate");
        let mut gates = vec![id.clone(); before];
        gates.extend(self.gates.iter().cloned());
        gates.extend(std::iter::repeat_n(id, after));
        Circuit { n: self.n, gates }
    }

    fn ensure_clock_dim(&self, sites: usize) -> Result<usize> {
        let dim = sites * self.dim();
        if dim > DEFAULT_DIM_CAP {
            return Err(Error::CapExceeded {
                dim,
                cap: DEFAULT_DIM_CAP,
            });
        }
        Ok(dim)
    }

    /// `U_t ... U_1` for `t = 0..=T`.
    fn prefixes(&self) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(self.t() + 1);
        let mut acc = CMatrix::identity(self.dim());
        out.push(acc.clone());
        for g in &self.gates {
            acc = g
                .embed(self.n)
                .matmul(&acc)
                .expect("square operators of equal size");
            out.push(acc.clone());
        }
        out
    }
}

/// `U = U_T ... U_1`.
pub fn circuit_unitary(c: &Circuit) -> Result<CMatrix> {
    let u = c.prefixes().pop().expect("at least the identity");
    u.ensure_unitary(1e-9)?;
    Ok(u)
}

/// `W = sum_t |t><t| (x) U_t ... U_1`, of dimension `(T+1) 2^n`.
pub fn history_unitary(c: &Circuit) -> Result<CMatrix> {
    let d = c.dim();
    let dim = c.ensure_clock_dim(c.t() + 1)?;
    let mut w = CMatrix::zeros(dim, dim);
    for (t, v) in c.prefixes().iter().enumerate() {
        set_block(&mut w, d, t, t, v);
    }
    w.ensure_unitary(1e-9)?;
    Ok(w)
}

fn set_block(m: &mut CMatrix, d: usize, bi: usize, bj: usize, block: &CMatrix) {
    for i in 0..d {
        for j in 0..d {
            m[(bi * d + i, bj * d + j)] = block[(i, j)];
        }
    }
}

fn add_block(m: &mut CMatrix, d: usize, bi: usize, bj: usize, block: &CMatrix) {
    for i in 0..d {
        for j in 0..d {
            m[(bi * d + i, bj * d + j)] += block[(i, j)];
        }
    }
}

fn check_lengths(w: &ClockWeights, c: &Circuit) -> Result<()> {
    if w.t() != c.t() {
        return Err(Error::DimensionMismatch {
            expected: c.t(),
            found: w.t(),
        });
    }
    Ok(())
}

/// `sum a_t |t><t| (x) I + sum (b_t |t+1><t| (x) U_{t+1} + h.c.)`.
pub fn h_prop(w: &ClockWeights, c: &Circuit) -> Result<HermitianMatrix> {
    check_lengths(w, c)?;
    let d = c.dim();
    let dim = c.ensure_clock_dim(c.t() + 1)?;
    let mut m = CMatrix::zeros(dim, dim);
    for (t, &a) in w.a().iter().enumerate() {
        for i in 0..d {
            m[(t * d + i, t * d + i)] = C64::new(a, 0.0);
        }
    }
    for (t, (g, &b)) in c.gates.iter().zip(w.b()).enumerate() {
        let u = g.embed(c.n);
        set_block(&mut m, d, t + 1, t, &u.scale(b));
        set_block(&mut m, d, t, t + 1, &u.adjoint().scale(b.conj()));
    }
    HermitianMatrix::new(m)
}

/// Input projector `pi_in` applied at clock time 0, output projector `pi_out` at time T.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PenaltyWire", into = "PenaltyWire")]
pub struct PenaltyPair {
    pi_in: HermitianMatrix,
    pi_out: HermitianMatrix,
}

#[derive(Serialize, Deserialize)]
struct PenaltyWire {
    pi_in: HermitianMatrix,
    pi_out: HermitianMatrix,
}

impl TryFrom<PenaltyWire> for PenaltyPair {
    type Error = Error;

    fn try_from(w: PenaltyWire) -> Result<Self> {
        PenaltyPair::new(w.pi_in, w.pi_out)
    }
}

impl From<PenaltyPair> for PenaltyWire {
    fn from(p: PenaltyPair) -> Self {
        PenaltyWire {
            pi_in: p.pi_in,
            pi_out: p.pi_out,
        }
    }
}

/// Penalties given by qubit lists: the listed ancillas must start in `|0>`
/// and the output qubit is penalized in `|0>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PenaltySpec {
    #[serde(default)]
    pub ancillas: Vec<usize>,
    pub output: usize,
}

impl PenaltySpec {
    pub fn to_pair(&self, n: usize) -> Result<PenaltyPair> {
        PenaltyPair::standard(n, &self.ancillas, self.output)
    }
}

impl PenaltyPair {
    pub fn new(pi_in: HermitianMatrix, pi_out: HermitianMatrix) -> Result<Self> {
        if pi_in.dim() != pi_out.dim() {
            return Err(Error::DimensionMismatch {
                expected: pi_in.dim(),
                found: pi_out.dim(),
            });
        }
        pi_in.ensure_projector(tol::PROJECTOR)?;
        pi_out.ensure_projector(tol::PROJECTOR)?;
        Ok(PenaltyPair { pi_in, pi_out })
    }

    pub fn zero(n: usize) -> Self {
        let z = HermitianMatrix::zeros(1 << n);
        PenaltyPair {
            pi_in: z.clone(),
            pi_out: z,
        }
    }

    pub fn identity(n: usize) -> Self {
        let i = HermitianMatrix::identity(1 << n);
        PenaltyPair {
            pi_in: i.clone(),
            pi_out: i,
        }
    }

    /// `pi_in = I - (|0><0| on every ancilla)`, `pi_out = |0><0|` on `output`.
    pub fn standard(n: usize, ancillas: &[usize], output: usize) -> Result<Self> {
        if let Some(&q) = ancillas.iter().chain([&output]).find(|&&q| q >= n) {
            return Err(Error::invalid(format!(
                "qubit {q} out of range for n = {n}"
            )));
        }
        let dim = 1usize << n;
        let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
        let pin: Vec<f64> = (0..dim)
            .map(|i| f64::from(ancillas.iter().any(|&q| bit(i, q) == 1)))
            .collect();
        let pout: Vec<f64> = (0..dim).map(|i| f64::from(bit(i, output) == 0)).collect();
        Ok(PenaltyPair {
            pi_in: HermitianMatrix::diagonal(&pin),
            pi_out: HermitianMatrix::diagonal(&pout),
        })
    }

    pub fn pi_in(&self) -> &HermitianMatrix {
        &self.pi_in
    }

    pub fn pi_out(&self) -> &HermitianMatrix {
        &self.pi_out
    }

    pub fn dim(&self) -> usize {
        self.pi_in.dim()
    }

    fn check_circuit(&self, c: &Circuit) -> Result<()> {
        if self.dim() != c.dim() {
            return Err(Error::DimensionMismatch {
                expected: c.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// `h_prop + |0><0| (x) pi_in + |T><T| (x) pi_out`.
pub fn h_fk(w: &ClockWeights, c: &Circuit, p: &PenaltyPair) -> Result<HermitianMatrix> {
    p.check_circuit(c)?;
    let mut m = h_prop(w, c)?.into_matrix();
    let d = c.dim();
    add_block(&mut m, d, 0, 0, p.pi_in.as_matrix());
    add_block(&mut m, d, c.t(), c.t(), p.pi_out.as_matrix());
    HermitianMatrix::new(m)
}

/// Maximum acceptance probability over valid inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Acceptance {
    pub eps: f64,
    /// Set when `ker pi_in` or `ker pi_out` is `{0}`; `eps` is then 0 by convention.
    pub trivial_kernel: bool,
}

/// `eps = max |<eta|U|xi>|^2` over unit `xi` in `ker pi_in`, `eta` in `ker pi_out`.
pub fn acceptance_probability(c: &Circuit, p: &PenaltyPair) -> Result<Acceptance> {
    p.check_circuit(c)?;
    acceptance_for_unitary(&circuit_unitary(c)?, p)
}

/// [`acceptance_probability`] for an explicit unitary.
pub fn acceptance_for_unitary(u: &CMatrix, p: &PenaltyPair) -> Result<Acceptance> {
    if u.rows() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: u.rows(),
        });
    }
    let q_in = kernel_basis(&p.pi_in, tol::KERNEL)?;
    let q_out = kernel_basis(&p.pi_out, tol::KERNEL)?;
    if q_in.cols() == 0 || q_out.cols() == 0 {
        return Ok(Acceptance {
            eps: 0.0,
            trivial_kernel: true,
        });
    }
    let overlap = q_out.adjoint().matmul(&u.matmul(&q_in)?)?;
    let s = singular_values(&overlap)?[0];
    Ok(Acceptance {
        eps: (s * s).clamp(0.0, 1.0),
        trivial_kernel: false,
    })
}

/// `E(h_fk) - E(h_prop)` for this circuit.
pub fn unsat_penalty(w: &ClockWeights, c: &Circuit, p: &PenaltyPair) -> Result<f64> {
    let e_fk = eig_hermitian(&h_fk(w, c, p)?, tol::EIG)?.eigenvalues[0];
    let e_prop = eig_hermitian(&h_prop(w, c)?, tol::EIG)?.eigenvalues[0];
    Ok(e_fk - e_prop)
}

/// `(gap/4)(1 - sqrt(eps)) min(pi0, piT)`; expects `gap >= 0` and the rest in `[0, 1]`.
pub fn geometrical_lower_bound(gap: f64, eps: f64, pi0: f64, pi_t: f64) -> f64 {
    gap / 4.0 * (1.0 - eps.sqrt()) * pi0.min(pi_t)
}

/// The two-sided bound on the UNSAT penalty of one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub eps: f64,
    pub clock_gap: f64,
    pub pi0: f64,
    pub pi_t: f64,
    pub lower: f64,
    pub penalty: f64,
    /// `E(H_clock + |0><0| + |T><T|) - E(H_clock)`.
    pub upper: f64,
    /// Clock gap below the gap (one) of the nonzero penalty terms.
    pub hypothesis: bool,
    pub holds: bool,
}

pub fn lemma2_sandwich(w: &ClockWeights, c: &Circuit, p: &PenaltyPair) -> Result<SandwichReport> {
    let clock = w.gauged();
    let ground = clock.ground_state()?;
    let t = w.t();
    let pi0 = ground.vector[0].norm_sqr();
    let pi_t = ground.vector[t].norm_sqr();
    let clock_gap = clock.spectral_gap()?;
    let eps = acceptance_probability(c, p)?.eps;
    let penalty = unsat_penalty(w, c, p)?;

    let mut diag = clock.diag().to_vec();
    diag[0] += 1.0;
    diag[t] += 1.0;
    let ends = SymTridiagonal::new(diag, clock.offdiag().to_vec())?;
    let upper = ends.kth_eigenvalue(0) - clock.kth_eigenvalue(0);

    let lower = geometrical_lower_bound(clock_gap, eps, pi0, pi_t);
    let slack = 1e-10;
    Ok(SandwichReport {
        eps,
        clock_gap,
        pi0,
        pi_t,
        lower,
        penalty,
        upper,
        hypothesis: clock_gap < 1.0,
        holds: lower <= penalty + slack && penalty <= upper + slack,
    })
}

/// One 2x2 block `[[lambda, -|xi|], [-|xi|, mu]]` of the output projector,
/// pairing a direction in `range pi_in` with one in `ker pi_in`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairBlock {
    pub lambda: f64,
    pub mu: f64,
    /// `|xi|`.
    pub xi: f64,
    /// `|xi| / mu`, so that `lambda = eta^2 mu` for a rank-one block.
    pub eta: f64,
}

impl PairBlock {
    pub fn trace(&self) -> f64 {
        self.lambda + self.mu
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairReport {
    pub eps: f64,
    pub blocks: Vec<PairBlock>,
    pub max_trace_defect: f64,
    /// `lambda <= eps/2`, `|xi| <= sqrt(eps/2)` and `mu >= 1 - eps` on every block.
    pub stated_bounds_hold: bool,
    /// `lambda <= eps`, `eta^2 <= eps/(1-eps)`, `mu >= 1 - eps` and unit trace.
    pub bounds_hold: bool,
}

/// Blocks of `M = U^dag pi_out U` in the joint decomposition with `pi_in`.
///
/// Requires `rank pi_in, rank pi_out >= d/2` and `pi_in + M` invertible, which
/// is what a rejecting instance provides.
pub fn projector_pair_quantities(p: &PenaltyPair, u: &CMatrix) -> Result<PairReport> {
    let d = p.dim();
    if u.rows() != d || u.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u.rows(),
        });
    }
    u.ensure_unitary(tol::UNITARY)?;
    let rank_in = p.pi_in.trace().round() as usize;
    let rank_out = p.pi_out.trace().round() as usize;
    if 2 * rank_in < d || 2 * rank_out < d {
        return Err(Error::precondition(format!(
            "projector ranks {rank_in} (input) and {rank_out} (output) must both be at least d/2 = {}",
            d / 2
        )));
    }
    let m = HermitianMatrix::new(u.adjoint().matmul(&p.pi_out.as_matrix().matmul(u)?)?)?;
    let sum = p.pi_in.add(&m)?;
    let smallest = eig_hermitian(&sum, tol::EIG)?.eigenvalues[0];
    if smallest <= tol::KERNEL {
        return Err(Error::precondition(format!(
            "pi_in + U^dag pi_out U is rank deficient (smallest eigenvalue {smallest:.3e}); \
             some valid input is accepted with certainty"
        )));
    }

    let eps = acceptance_for_unitary(u, p)?.eps;
    let kernel = kernel_basis(&p.pi_in, tol::KERNEL)?;
    let compressed =
        HermitianMatrix::new(kernel.adjoint().matmul(&m.as_matrix().matmul(&kernel)?)?)?;
    let dec = eig_hermitian(&compressed, tol::EIG)?;
    let mut blocks = Vec::with_capacity(dec.eigenvalues.len());
    for j in 0..dec.eigenvalues.len() {
        let x = kernel.mul_vec(&dec.vector(j));
        let mu = m.expectation(&x);
        let mut y = p.pi_in.mul_vec(&m.mul_vec(&x));
        let ny = crate::spectral::norm(&y);
        let (lambda, xi) = if ny <= 1e-12 {
            (0.0, 0.0)
        } else {
            y.iter_mut().for_each(|z| *z /= ny);
            let my = m.mul_vec(&x);
            let xi: C64 = y.iter().zip(&my).map(|(a, b)| a.conj() * b).sum();
            (m.expectation(&y), xi.norm())
        };
        blocks.push(PairBlock {
            lambda,
            mu,
            xi,
            eta: xi / mu,
        });
    }

    let slack = 1e-9;
    let max_trace_defect = blocks
        .iter()
        .fold(0.0f64, |a, b| a.max((b.trace() - 1.0).abs()));
    let stated_bounds_hold = blocks.iter().all(|b| {
        b.lambda <= eps / 2.0 + slack
            && b.xi <= (eps / 2.0).sqrt() + slack
            && b.mu >= 1.0 - eps - slack
    });
    let eta_cap = if eps < 1.0 {
        eps / (1.0 - eps)
    } else {
        f64::INFINITY
    };
    let bounds_hold = max_trace_defect <= slack
        && blocks.iter().all(|b| {
            b.lambda <= eps + slack && b.eta * b.eta <= eta_cap + slack && b.mu >= 1.0 - eps - slack
        });
    Ok(PairReport {
        eps,
        blocks,
        max_trace_defect,
        stated_bounds_hold,
        bounds_hold,
    })
}

/// The circuit padded with `T/2` identities on each side, run on an
/// unweighted path clock of `2T + 1` sites, with the input penalty spread over
/// the first `T/2 + 1` sites and the output penalty over the last `T/2 + 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PaddedReport {
    pub h: HermitianMatrix,
    pub p: HermitianMatrix,
    pub eps: f64,
    /// Largest squared cosine between `ker h` and `ker p`.
    pub cos2theta: f64,
    /// `(3 + eps)/4`.
    pub stated_bound: f64,
    /// `(3T/2 + (T/2 + 1) sqrt(eps)) / (2T + 1)`, the value for this layout.
    pub exact: f64,
    pub stated_bound_holds: bool,
}

fn padded_parts(
    c: &Circuit,
    p: &PenaltyPair,
) -> Result<(Circuit, HermitianMatrix, HermitianMatrix)> {
    p.check_circuit(c)?;
    let t = c.t();
    if !t.is_multiple_of(2) {
        return Err(Error::invalid(format!("padding needs an even T, got {t}")));
    }
    let padded = c.padded(t / 2, t / 2);
    let sites = 2 * t + 1;
    let dim = c.ensure_clock_dim(sites)?;
    let h = h_prop(&ClockWeights::kitaev(2 * t)?, &padded)?;
    let d = c.dim();
    let mut pm = CMatrix::zeros(dim, dim);
    for s in 0..=t / 2 {
        set_block(&mut pm, d, s, s, p.pi_in.as_matrix());
    }
    for s in 3 * t / 2..sites {
        set_block(&mut pm, d, s, s, p.pi_out.as_matrix());
    }
    Ok((padded, h, HermitianMatrix::new(pm)?))
}

pub fn padded_construction(c: &Circuit, p: &PenaltyPair) -> Result<PaddedReport> {
    let (padded, h, pm) = padded_parts(c, p)?;
    let t = c.t();
    let sites = 2 * t + 1;
    let d = c.dim();

    // ker h is spanned by W(|u> (x) e_k) with u uniform over the clock
    let w = history_unitary(&padded)?;
    let amp = C64::new(1.0 / (sites as f64).sqrt(), 0.0);
    let cols: Vec<Vec<C64>> = (0..d)
        .map(|k| {
            let mut v = vec![ZERO; sites * d];
            for s in 0..sites {
                v[s * d + k] = amp;
            }
            w.mul_vec(&v)
        })
        .collect();
    let basis = CMatrix::from_columns(sites * d, &cols);
    let keep = CMatrix::identity(sites * d).sub(pm.as_matrix())?;
    let s = singular_values(&keep.matmul(&basis)?)?[0];
    let cos2theta = (s * s).min(1.0);

    let eps = acceptance_probability(c, p)?.eps;
    let tf = t as f64;
    let stated_bound = (3.0 + eps) / 4.0;
    let exact = (1.5 * tf + (tf / 2.0 + 1.0) * eps.sqrt()) / (2.0 * tf + 1.0);
    Ok(PaddedReport {
        h,
        p: pm,
        eps,
        cos2theta,
        stated_bound,
        exact,
        stated_bound_holds: cos2theta <= stated_bound + 1e-9,
    })
}

/// `E(h + p) - E(h)` for the padded construction.
pub fn padded_unsat_penalty(c: &Circuit, p: &PenaltyPair) -> Result<f64> {
    let (_, h, pm) = padded_parts(c, p)?;
    let e = eig_hermitian(&h.add(&pm)?, tol::EIG)?.eigenvalues[0];
    let e0 = eig_hermitian(&h, tol::EIG)?.eigenvalues[0];
    Ok(e - e0)
}

/// `H_clock (x) I` for comparison with `W^dag h_prop W`.
pub fn clock_tensor_identity(w: &ClockWeights, n: usize) -> Result<HermitianMatrix> {
    crate::spectral::kron(&clock_hamiltonian(w), &HermitianMatrix::identity(1 << n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clockham::{endpoint_penalized_energy, TimeDistribution};
    use crate::spectral::eigenvalues;
    use proptest::prelude::*;

    fn gate(name: &str, targets: &[usize]) -> Gate {
        Gate::named(name, targets.to_vec()).unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        a.sub(b).unwrap().max_abs() <= tol
    }

    fn rejecting(n: usize, t: usize) -> (Circuit, PenaltyPair) {
        (
            Circuit::identity(n, t).unwrap(),
            PenaltyPair::standard(n, &[0], 0).unwrap(),
        )
    }

    #[test]
    fn single_gate_unitaries() {
        let x = builtin("X").unwrap();
        let c = Circuit::new(1, vec![gate("X", &[0])]).unwrap();
        assert!(close(&circuit_unitary(&c).unwrap(), &x, 0.0));
        let c = Circuit::new(1, vec![gate("X", &[0]), gate("X", &[0])]).unwrap();
        assert!(close(
            &circuit_unitary(&c).unwrap(),
            &CMatrix::identity(2),
            0.0
        ));
        let c = Circuit::new(1, vec![gate("H", &[0]), gate("Z", &[0]), gate("H", &[0])]).unwrap();
        assert!(close(&circuit_unitary(&c).unwrap(), &x, 1e-12));
    }

    #[test]
    fn embedding_respects_qubit_order() {
        // X on qubit 0 of two flips the most significant bit
        let u = gate("X", &[0]).embed(2);
        assert_eq!(u[(2, 0)], ONE);
        let u = gate("X", &[1]).embed(2);
        assert_eq!(u[(1, 0)], ONE);
        // CNOT with control 1 and target 0 maps |01> to |11>
        let u = gate("CNOT", &[1, 0]).embed(2);
        assert_eq!(u[(3, 1)], ONE);
        assert_eq!(u[(0, 0)], ONE);
        assert_eq!(u[(2, 2)], ONE);
    }

    #[test]
    fn history_unitary_examples() {
        let c = Circuit::identity(2, 3).unwrap();
        assert!(close(
            &history_unitary(&c).unwrap(),
            &CMatrix::identity(16),
            0.0
        ));
        let c = Circuit::new(1, vec![gate("X", &[0])]).unwrap();
        let w = history_unitary(&c).unwrap();
        let want = CMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        assert!(close(&w, &want, 0.0));
    }

    #[test]
    fn h_prop_single_x() {
        let c = Circuit::new(1, vec![gate("X", &[0])]).unwrap();
        let vals = eigenvalues(&h_prop(&ClockWeights::kitaev(1).unwrap(), &c).unwrap()).unwrap();
        for (v, want) in vals.iter().zip([0.0, 0.0, 2.0, 2.0]) {
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn h_prop_identity_is_clock_tensor_identity() {
        let w = ClockWeights::kitaev(4).unwrap();
        let h = h_prop(&w, &Circuit::identity(2, 4).unwrap()).unwrap();
        assert_eq!(h, clock_tensor_identity(&w, 2).unwrap());
    }

    #[test]
    fn h_prop_rejects_length_mismatch() {
        let w = ClockWeights::kitaev(3).unwrap();
        assert!(matches!(
            h_prop(&w, &Circuit::identity(1, 4).unwrap()),
            Err(Error::DimensionMismatch {
                expected: 4,
                found: 3
            })
        ));
    }

    #[test]
    fn dense_cap_enforced() {
        let c = Circuit::identity(6, 70).unwrap();
        assert!(matches!(
            history_unitary(&c),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            Circuit::identity(7, 1),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn h_fk_examples() {
        let w = ClockWeights::kitaev(3).unwrap();
        let c = Circuit::new(1, vec![gate("H", &[0]), gate("T", &[0]), gate("X", &[0])]).unwrap();
        assert_eq!(
            h_fk(&w, &c, &PenaltyPair::zero(1)).unwrap(),
            h_prop(&w, &c).unwrap()
        );

        let vals = eigenvalues(&h_fk(&w, &c, &PenaltyPair::identity(1)).unwrap()).unwrap();
        let clock = crate::clockham::endpoint_penalized_clock(3)
            .unwrap()
            .eigenvalues();
        for (k, v) in vals.iter().enumerate() {
            assert!((v - clock[k / 2]).abs() < 1e-12);
        }

        let (c, p) = rejecting(1, 3);
        let e = eigenvalues(&h_fk(&w, &c, &p).unwrap()).unwrap()[0];
        assert!(e > 1e-3);
    }

    #[test]
    fn acceptance_examples() {
        let p = PenaltyPair::standard(1, &[0], 0).unwrap();
        let cases = [("I", 0.0), ("X", 1.0), ("H", 0.5)];
        for (name, want) in cases {
            let c = Circuit::new(1, vec![gate(name, &[0])]).unwrap();
            let a = acceptance_probability(&c, &p).unwrap();
            assert!((a.eps - want).abs() < 1e-12, "{name}");
            assert!(!a.trivial_kernel);
        }
        let c = Circuit::identity(1, 1).unwrap();
        let a = acceptance_probability(&c, &PenaltyPair::identity(1)).unwrap();
        assert_eq!(a.eps, 0.0);
        assert!(a.trivial_kernel);
    }

    #[test]
    fn penalty_and_bound_examples() {
        let w = ClockWeights::kitaev(4).unwrap();
        let c = Circuit::new(2, vec![gate("H", &[0]); 4]).unwrap();
        assert!(unsat_penalty(&w, &c, &PenaltyPair::zero(2)).unwrap().abs() < 1e-12);
        assert!((geometrical_lower_bound(0.1, 0.25, 0.25, 0.5) - 0.003125).abs() < 1e-15);
        assert_eq!(geometrical_lower_bound(0.3, 1.0, 0.5, 0.5), 0.0);
    }

    #[test]
    fn sandwich_on_rejecting_family() {
        for t in [4, 8] {
            let (c, p) = rejecting(2, t);
            for w in [
                ClockWeights::kitaev(t).unwrap(),
                ClockWeights::theorem1(t).unwrap(),
            ] {
                let r = lemma2_sandwich(&w, &c, &p).unwrap();
                assert!(r.holds, "{r:?}");
                assert!(r.hypothesis);
                assert!(r.lower > 0.0);
            }
        }
    }

    #[test]
    fn endpoint_identity_penalty_equals_upper_bound() {
        let t = 6;
        let w = ClockWeights::kitaev(t).unwrap();
        let c = Circuit::identity(1, t).unwrap();
        let e = unsat_penalty(&w, &c, &PenaltyPair::identity(1)).unwrap();
        assert!((e - endpoint_penalized_energy(t)).abs() < 1e-10);
        let r = lemma2_sandwich(&w, &c, &PenaltyPair::identity(1)).unwrap();
        assert!((r.upper - e).abs() < 1e-10);
    }

    #[test]
    fn projector_pair_hadamard() {
        let p = PenaltyPair::standard(1, &[0], 0).unwrap();
        let r = projector_pair_quantities(&p, &builtin("H").unwrap()).unwrap();
        assert_eq!(r.blocks.len(), 1);
        let b = r.blocks[0];
        assert!((b.mu - 0.5).abs() < 1e-12);
        assert!((b.lambda - 0.5).abs() < 1e-12);
        assert!((b.eta - 1.0).abs() < 1e-12);
        assert!((r.eps - 0.5).abs() < 1e-12);
        assert!(r.bounds_hold);
        // lambda = 1/2 exceeds eps/2 = 1/4
        assert!(!r.stated_bounds_hold);
    }

    #[test]
    fn projector_pair_orthogonal() {
        let p = PenaltyPair::standard(2, &[0], 0).unwrap();
        let r = projector_pair_quantities(&p, &CMatrix::identity(4)).unwrap();
        assert_eq!(r.eps, 0.0);
        assert_eq!(r.blocks.len(), 2);
        for b in &r.blocks {
            assert!(b.eta.abs() < 1e-12 && (b.mu - 1.0).abs() < 1e-12);
        }
        assert!(r.stated_bounds_hold && r.bounds_hold);
    }

    #[test]
    fn projector_pair_rank_deficient() {
        let p = PenaltyPair::standard(1, &[0], 0).unwrap();
        let err = projector_pair_quantities(&p, &builtin("X").unwrap()).unwrap_err();
        assert!(matches!(err, Error::Precondition(ref m) if m.contains("rank deficient")));
    }

    #[test]
    fn padded_examples() {
        // accepting with certainty
        let c = Circuit::new(1, vec![gate("X", &[0]), gate("I", &[0])]).unwrap();
        let p = PenaltyPair::standard(1, &[0], 0).unwrap();
        let r = padded_construction(&c, &p).unwrap();
        assert!((r.eps - 1.0).abs() < 1e-12);
        assert!((r.cos2theta - 1.0).abs() < 1e-9);

        let (c, p) = rejecting(1, 4);
        let r = padded_construction(&c, &p).unwrap();
        assert!(r.cos2theta <= 0.75);
        assert!((r.cos2theta - r.exact).abs() < 1e-9);
        assert!(r.stated_bound_holds);

        let (c, p) = rejecting(1, 3);
        assert!(padded_construction(&c, &p).is_err());
    }

    #[test]
    fn padded_angle_matches_layout_formula() {
        let c = Circuit::new(1, vec![gate("H", &[0]), gate("I", &[0])]).unwrap();
        let p = PenaltyPair::standard(1, &[0], 0).unwrap();
        let r = padded_construction(&c, &p).unwrap();
        assert!((r.eps - 0.5).abs() < 1e-12);
        assert!((r.cos2theta - r.exact).abs() < 1e-9);
    }

    #[test]
    fn gate_json_round_trip() {
        let json = r#"{"n":2,"gates":[{"name":"H","targets":[0]},{"name":"CNOT","targets":[0,1]},
            {"matrix":[[[0,0],[1,0]],[[1,0],[0,0]]],"targets":[1]}]}"#;
        let c: Circuit = serde_json::from_str(json).unwrap();
        assert_eq!(c.t(), 3);
        assert_eq!(c.gates()[0].name(), Some("H"));
        let back: Circuit = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"n":1,"gates":[{"matrix":[[[1,0],[1,0]],[[0,0],[1,0]]],"targets":[0]}]}"#;
        assert!(serde_json::from_str::<Circuit>(bad).is_err());
        let bad = r#"{"n":1,"gates":[{"name":"X","targets":[1]}]}"#;
        assert!(serde_json::from_str::<Circuit>(bad).is_err());
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        let names = prop::sample::select(vec!["I", "X", "Y", "Z", "H", "S", "T", "CNOT"]);
        (names, 0..n, 0..n).prop_filter_map("two distinct qubits", move |(name, a, b)| {
            if name == "CNOT" {
                (a != b).then(|| gate(name, &[a, b]))
            } else {
                Some(gate(name, &[a]))
            }
        })
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        (1usize..=3, 1usize..=8).prop_flat_map(|(n, t)| {
            prop::collection::vec(arb_gate(n), t).prop_map(move |g| Circuit::new(n, g).unwrap())
        })
    }

    fn arb_weights(t: usize) -> impl Strategy<Value = ClockWeights> {
        (
            prop::collection::vec(0.05f64..1.0, t + 1),
            prop::collection::vec((0.05f64..1.0, -3.1f64..3.1), t),
        )
            .prop_map(|(a, b)| {
                let b = b
                    .into_iter()
                    .map(|(r, th)| C64::from_polar(r, th))
                    .collect();
                ClockWeights::new(a, b).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn history_state_conjugation(
            (c, w) in arb_circuit().prop_flat_map(|c| { let t = c.t(); (Just(c), arb_weights(t)) })
        ) {
            let wm = history_unitary(&c).unwrap();
            let conj = h_prop(&w, &c).unwrap().conjugate_by(&wm).unwrap();
            let want = clock_tensor_identity(&w, c.n()).unwrap();
            prop_assert!(conj.as_matrix().sub(want.as_matrix()).unwrap().max_abs() <= 1e-9);

            let vals = eigenvalues(&h_prop(&w, &c).unwrap()).unwrap();
            let clock = w.gauged().eigenvalues();
            let d = c.dim();
            for (k, v) in vals.iter().enumerate() {
                prop_assert!((v - clock[k / d]).abs() <= 1e-9);
            }
        }

        #[test]
        fn acceptance_invariant_under_identity_padding(c in arb_circuit(), extra in 1usize..4) {
            let p = PenaltyPair::standard(c.n(), &[0], c.n() - 1).unwrap();
            let a = acceptance_probability(&c, &p).unwrap().eps;
            let b = acceptance_probability(&c.padded(0, extra), &p).unwrap().eps;
            prop_assert!((a - b).abs() <= 1e-10);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn sandwich_holds(c in arb_circuit()) {
            let p = PenaltyPair::standard(c.n(), &[0], c.n() - 1).unwrap();
            let t = c.t();
            let weights = if t >= 2 {
                vec![ClockWeights::kitaev(t).unwrap(), ClockWeights::theorem1(t).unwrap()]
            } else {
                vec![ClockWeights::kitaev(t).unwrap()]
            };
            for w in weights {
                let r = lemma2_sandwich(&w, &c, &p).unwrap();
                prop_assert!(r.penalty >= -1e-10);
                prop_assert!(r.penalty <= r.upper + 1e-10, "{:?}", r);
                if r.hypothesis {
                    prop_assert!(r.lower <= r.penalty + 1e-10, "{:?}", r);
                }
            }
        }

        #[test]
        fn projector_pair_blocks_on_rejecting_instances(c in arb_circuit()) {
            let n = c.n();
            prop_assume!(n >= 2);
            let p = PenaltyPair::standard(n, &[n - 1], 0).unwrap();
            let u = circuit_unitary(&c).unwrap();
            if let Ok(r) = projector_pair_quantities(&p, &u) {
                prop_assert!(r.max_trace_defect <= 1e-9);
                prop_assert!(r.bounds_hold, "{:?}", r);
                for b in &r.blocks {
                    prop_assert!((b.lambda - b.eta * b.eta * b.mu).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn metropolis_weights_make_frustration_free_prop() {
        let pi = TimeDistribution::from_weights(&[1.0, 2.0, 3.0, 2.0, 1.0]).unwrap();
        let w = ClockWeights::metropolis(&pi);
        let c = Circuit::new(
            1,
            vec![
                gate("H", &[0]),
                gate("S", &[0]),
                gate("X", &[0]),
                gate("T", &[0]),
            ],
        )
        .unwrap();
        let e = eigenvalues(&h_prop(&w, &c).unwrap()).unwrap()[0];
        assert!(e.abs() < 1e-12);
    }
}

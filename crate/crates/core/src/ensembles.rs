//! Seeded random instances: time distributions, tridiagonal clocks, circuits,
//! simple unitary labeled graphs and banded Hermitian matrices.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuitham::{Circuit, Gate};
use crate::clockham::{ClockWeights, TimeDistribution};
use crate::error::Result;
use crate::spectral::{CMatrix, HermitianMatrix, HermitianTridiagonal, C64};
use crate::ulg::{Label, UlgEdge, UnitaryLabeledGraph};

/// The generator used everywhere a seed is recorded.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weights drawn uniformly from `[0.05, 1]`, normalized.
pub fn random_distribution(rng: &mut impl Rng, t: usize) -> Result<TimeDistribution> {
    let w: Vec<f64> = (0..=t).map(|_| rng.gen_range(0.05..=1.0)).collect();
    TimeDistribution::from_weights(&w)
}

/// Tridiagonal with `a_t` uniform in `a_range`, `|b_t|` uniform in `b_range`
/// and uniformly random phases on `b_t`.
pub fn random_tridiagonal(
    rng: &mut impl Rng,
    t: usize,
    a_range: (f64, f64),
    b_range: (f64, f64),
) -> HermitianTridiagonal {
    let diag = (0..=t)
        .map(|_| rng.gen_range(a_range.0..=a_range.1))
        .collect();
    let lower = (0..t)
        .map(|_| C64::from_polar(rng.gen_range(b_range.0..=b_range.1), rng.gen_range(-PI..PI)))
        .collect();
    HermitianTridiagonal { diag, lower }
}

/// Random clock weights with `|a_t|, |b_t| <= 1`.
pub fn random_weights(rng: &mut impl Rng, t: usize) -> Result<ClockWeights> {
    let h = random_tridiagonal(rng, t, (-1.0, 1.0), (0.05, 1.0));
    ClockWeights::new(h.diag, h.lower)
}

/// Haar-random element of SU(2) from a uniform unit quaternion.
pub fn random_su2(rng: &mut impl Rng) -> CMatrix {
    let q = loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
        let n2: f64 = q.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            break q.map(|x| x / n);
        }
    };
    let a = C64::new(q[0], q[1]);
    let b = C64::new(q[2], q[3]);
    CMatrix::from_vec(2, 2, vec![a, -b.conj(), b, a.conj()]).expect("2 x 2")
}

/// `t` gates on `n` qubits: built-in single-qubit gates, random SU(2) and
/// (for `n >= 2`) CNOTs.
pub fn random_circuit(rng: &mut impl Rng, n: usize, t: usize) -> Result<Circuit> {
    const NAMES: [&str; 7] = ["I", "X", "Y", "Z", "H", "S", "T"];
    let mut gates = Vec::with_capacity(t);
    for _ in 0..t {
        let q = rng.gen_range(0..n);
        let g = match rng.gen_range(0..10) {
            0..=4 => Gate::named(NAMES.choose(rng).expect("non-empty"), vec![q])?,
            5..=7 => Gate::new(random_su2(rng), vec![q])?,
            _ if n >= 2 => {
                let mut r = rng.gen_range(0..n - 1);
                if r >= q {
                    r += 1;
                }
                Gate::named("CNOT", vec![q, r])?
            }
            _ => Gate::new(random_su2(rng), vec![q])?,
        };
        gates.push(g);
    }
    Circuit::new(n, gates)
}

/// A random connected graph on `vertices` vertices with SU(2)-valued
/// (`d = 2`) labels, built from a random tree plus `extra` chords whose
/// labels close every loop consistently.
pub fn random_simple_ulg(
    rng: &mut impl Rng,
    vertices: usize,
    extra: usize,
) -> Result<UnitaryLabeledGraph> {
    let mut frames = vec![CMatrix::identity(2)];
    let mut edges = Vec::new();
    let mut pairs = Vec::new();
    for v in 1..vertices {
        let p = rng.gen_range(0..v);
        let u = random_su2(rng);
        let frame = u.matmul(&frames[p])?;
        frames.push(frame);
        if rng.gen_bool(0.5) {
            edges.push((p, v, u));
        } else {
            edges.push((v, p, u.adjoint()));
        }
        pairs.push((p.min(v), p.max(v)));
    }
    let mut tries = 0;
    let mut added = 0;
    while added < extra && tries < 100 * (extra + 1) {
        tries += 1;
        let a = rng.gen_range(0..vertices);
        let b = rng.gen_range(0..vertices);
        if a == b || pairs.contains(&(a.min(b), a.max(b))) {
            continue;
        }
        let u = frames[b].matmul(&frames[a].adjoint())?;
        edges.push((a, b, u));
        pairs.push((a.min(b), a.max(b)));
        added += 1;
    }
    let labels = (0..vertices as i64).map(Label::Int).collect();
    let edges = edges
        .into_iter()
        .map(|(a, b, unitary)| UlgEdge {
            a: Label::Int(a as i64),
            b: Label::Int(b as i64),
            unitary,
            weight: None,
        })
        .collect();
    UnitaryLabeledGraph::new(labels, edges, 2)
}

/// Hermitian matrix with entries of modulus at most 1 inside the band
/// `|i - j| <= bandwidth`, nonzero on the first off-diagonal.
pub fn random_banded_hermitian(rng: &mut impl Rng, n: usize, bandwidth: usize) -> HermitianMatrix {
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(rng.gen_range(-1.0..=1.0), 0.0);
        for j in i + 1..n.min(i + bandwidth + 1) {
            let r = if j == i + 1 {
                rng.gen_range(0.1..=1.0)
            } else {
                rng.gen_range(0.0..=1.0)
            };
            let z = C64::from_polar(r, rng.gen_range(-PI..PI));
            m[(j, i)] = z;
            m[(i, j)] = z.conj();
        }
    }
    HermitianMatrix::new(m).expect("Hermitian by construction")
}

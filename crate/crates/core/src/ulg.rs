//! Unitary labeled graphs: graphs whose directed edges carry unitaries acting
//! on a `d`-dimensional register, their Hamiltonians, simplicity, and the
//! diameter bound relating a matrix's connectivity to its spectral gap.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    eig_hermitian, CMatrix, EigenDecomposition, HermitianMatrix, C64, DEFAULT_DIM_CAP, ONE, ZERO,
};
use crate::tol;

/// A vertex name, either a number or a string in JSON.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Str(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Label {
    fn from(i: i64) -> Self {
        Label::Int(i)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Str(s.to_string())
    }
}

/// Transition `a -> b` applying `unitary`, with an optional edge weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UlgEdge {
    pub a: Label,
    pub b: Label,
    #[serde(with = "crate::spectral::matrix::rows_format")]
    pub unitary: CMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UlgWire", into = "UlgWire")]
pub struct UnitaryLabeledGraph {
    vertices: Vec<Label>,
    edges: Vec<UlgEdge>,
    d: usize,
    vertex_weights: Option<Vec<f64>>,
    // edge endpoints as vertex indices
    ends: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct UlgWire {
    vertices: Vec<Label>,
    edges: Vec<UlgEdge>,
    d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertex_weights: Option<Vec<f64>>,
}

impl TryFrom<UlgWire> for UnitaryLabeledGraph {
    type Error = Error;

    fn try_from(w: UlgWire) -> Result<Self> {
        let mut g = UnitaryLabeledGraph::new(w.vertices, w.edges, w.d)?;
        if let Some(vw) = w.vertex_weights {
            g = g.with_vertex_weights(vw)?;
        }
        Ok(g)
    }
}

impl From<UnitaryLabeledGraph> for UlgWire {
    fn from(g: UnitaryLabeledGraph) -> Self {
        UlgWire {
            vertices: g.vertices,
            edges: g.edges,
            d: g.d,
            vertex_weights: g.vertex_weights,
        }
    }
}

impl UnitaryLabeledGraph {
    pub fn new(vertices: Vec<Label>, edges: Vec<UlgEdge>, d: usize) -> Result<Self> {
        if vertices.is_empty() || d == 0 {
            return Err(Error::invalid("graph needs at least one vertex and d >= 1"));
        }
        let dim = vertices.len().saturating_mul(d);
        if dim > DEFAULT_DIM_CAP {
            return Err(Error::CapExceeded {
                dim,
                cap: DEFAULT_DIM_CAP,
            });
        }
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vertex {v}")));
            }
        }
        let lookup = |l: &Label| {
            index
                .get(l)
                .copied()
                .ok_or_else(|| Error::invalid(format!("edge endpoint {l} is not a vertex")))
        };
        let mut ends = Vec::with_capacity(edges.len());
        for e in &edges {
            let (a, b) = (lookup(&e.a)?, lookup(&e.b)?);
            if a == b {
                return Err(Error::invalid(format!("self-loop at {}", e.a)));
            }
            if ends.contains(&(a, b)) {
                return Err(Error::invalid(format!("repeated edge {} -> {}", e.a, e.b)));
            }
            if e.unitary.rows() != d || e.unitary.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: e.unitary.rows(),
                });
            }
            e.unitary.ensure_unitary(tol::UNITARY)?;
            if let Some(w) = e.weight {
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::invalid(format!("edge weight {w} must be positive")));
                }
            }
            ends.push((a, b));
        }
        Ok(UnitaryLabeledGraph {
            vertices,
            edges,
            d,
            vertex_weights: None,
            ends,
        })
    }

    pub fn with_vertex_weights(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: self.vertices.len(),
                found: w.len(),
            });
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("vertex weights must be finite"));
        }
        self.vertex_weights = Some(w);
        Ok(self)
    }

    /// Path `0 -> 1 -> ... -> T` with the given edge unitaries.
    pub fn path(unitaries: Vec<CMatrix>) -> Result<Self> {
        let d = unitaries.first().map_or(1, CMatrix::rows);
        let vertices = (0..=unitaries.len() as i64).map(Label::Int).collect();
        let edges = unitaries
            .into_iter()
            .enumerate()
            .map(|(t, u)| UlgEdge {
                a: Label::Int(t as i64),
                b: Label::Int(t as i64 + 1),
                unitary: u,
                weight: None,
            })
            .collect();
        Self::new(vertices, edges, d)
    }

    /// Two vertices joined by `a -> b` with the identity and `b -> a` with
    /// `U^dag`, i.e. a double edge `a -> b` carrying `{I, U}`.
    pub fn double_edge(u: &CMatrix) -> Result<Self> {
        let d = u.rows();
        let edges = vec![
            UlgEdge {
                a: "a".into(),
                b: "b".into(),
                unitary: CMatrix::identity(d),
                weight: None,
            },
            UlgEdge {
                a: "b".into(),
                b: "a".into(),
                unitary: u.adjoint(),
                weight: None,
            },
        ];
        Self::new(vec!["a".into(), "b".into()], edges, d)
    }

    pub fn vertices(&self) -> &[Label] {
        &self.vertices
    }

    pub fn edges(&self) -> &[UlgEdge] {
        &self.edges
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() * self.d
    }

    fn weight(&self, e: usize) -> f64 {
        self.edges[e].weight.unwrap_or(1.0)
    }

    /// Weighted Laplacian of the underlying graph plus vertex weights.
    pub fn laplacian(&self) -> HermitianMatrix {
        let n = self.vertices.len();
        let mut l = CMatrix::zeros(n, n);
        for (e, &(a, b)) in self.ends.iter().enumerate() {
            let w = C64::new(self.weight(e), 0.0);
            l[(a, a)] += w;
            l[(b, b)] += w;
            l[(a, b)] -= w;
            l[(b, a)] -= w;
        }
        if let Some(vw) = &self.vertex_weights {
            for (i, &x) in vw.iter().enumerate() {
                l[(i, i)] += C64::new(x, 0.0);
            }
        }
        HermitianMatrix::new(l).expect("symmetric by construction")
    }
}

/// `sum_edges w (|a> (x) I - |b> (x) U)(...)^dag` plus vertex weights.
pub fn ulg_hamiltonian(g: &UnitaryLabeledGraph) -> HermitianMatrix {
    let d = g.d;
    let mut h = CMatrix::zeros(g.dim(), g.dim());
    for (e, &(a, b)) in g.ends.iter().enumerate() {
        let w = g.weight(e);
        let u = &g.edges[e].unitary;
        for i in 0..d {
            h[(a * d + i, a * d + i)] += C64::new(w, 0.0);
            h[(b * d + i, b * d + i)] += C64::new(w, 0.0);
            for j in 0..d {
                h[(b * d + i, a * d + j)] -= u[(i, j)] * w;
                h[(a * d + j, b * d + i)] -= u[(i, j)].conj() * w;
            }
        }
    }
    if let Some(vw) = &g.vertex_weights {
        for (v, &x) in vw.iter().enumerate() {
            for i in 0..d {
                h[(v * d + i, v * d + i)] += C64::new(x, 0.0);
            }
        }
    }
    HermitianMatrix::new(h).expect("Hermitian by construction")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplicityReport {
    pub simple: bool,
    /// Vertices of the first fundamental cycle whose unitary product is not `I`,
    /// starting and ending at the same vertex.
    pub witness: Option<Vec<Label>>,
    /// Largest `|prod - I|` entry over the fundamental cycles.
    pub max_defect: f64,
}

struct Forest {
    /// Frame change from the component root to each vertex.
    frames: Vec<CMatrix>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    tree_edge: Vec<bool>,
}

fn spanning_forest(g: &UnitaryLabeledGraph) -> Forest {
    let n = g.vertices.len();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(a, b)) in g.ends.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut frames = vec![CMatrix::identity(g.d); n];
    let mut parent = vec![None; n];
    let mut depth = vec![0; n];
    let mut seen = vec![false; n];
    let mut tree_edge = vec![false; g.ends.len()];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &adj[v] {
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                tree_edge[e] = true;
                parent[w] = Some(v);
                depth[w] = depth[v] + 1;
                let u = &g.edges[e].unitary;
                // along a -> b the frame picks up U, against it U^dag
                let step = if g.ends[e].0 == v {
                    u.clone()
                } else {
                    u.adjoint()
                };
                frames[w] = step.matmul(&frames[v]).expect("d x d");
                queue.push_back(w);
            }
        }
    }
    Forest {
        frames,
        parent,
        depth,
        tree_edge,
    }
}

impl Forest {
    /// Vertices of the fundamental cycle closed by edge `a -> b`: `a -> b -> ... -> a`.
    fn cycle(&self, a: usize, b: usize) -> Vec<usize> {
        let (mut x, mut y) = (a, b);
        let (mut from_a, mut from_b) = (vec![a], vec![b]);
        while x != y {
            if self.depth[x] >= self.depth[y] {
                x = self.parent[x].expect("same component");
                from_a.push(x);
            } else {
                y = self.parent[y].expect("same component");
                from_b.push(y);
            }
        }
        // from_b runs b .. lca, from_a runs a .. lca; the cycle is a, b .. lca .. a
        from_a.pop();
        let mut cyc = vec![a];
        cyc.extend(from_b);
        cyc.extend(from_a.into_iter().rev());
        cyc
    }
}

/// Every loop product is the identity iff every fundamental cycle of a
/// spanning forest is.
pub fn is_simple(g: &UnitaryLabeledGraph) -> SimplicityReport {
    let f = spanning_forest(g);
    let id = CMatrix::identity(g.d);
    let mut max_defect: f64 = 0.0;
    let mut witness = None;
    for (e, &(a, b)) in g.ends.iter().enumerate() {
        if f.tree_edge[e] {
            continue;
        }
        let around = f.frames[b]
            .adjoint()
            .matmul(&g.edges[e].unitary.matmul(&f.frames[a]).expect("d x d"))
            .expect("d x d");
        let defect = around.sub(&id).expect("d x d").max_abs();
        max_defect = max_defect.max(defect);
        if defect > 1e-9 && witness.is_none() {
            witness = Some(
                f.cycle(a, b)
                    .into_iter()
                    .map(|v| g.vertices[v].clone())
                    .collect(),
            );
        }
    }
    SimplicityReport {
        simple: witness.is_none(),
        witness,
        max_defect,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// `max |W^dag H_G W - L (x) I|`.
    pub residual: f64,
    /// Largest difference between sorted spectra of `H_G` and `L` repeated `d` times.
    pub spectrum_residual: f64,
}

/// Conjugates `H_G` by the block-diagonal tree frame unitary and compares with `L (x) I_d`.
pub fn laplacian_equivalence_check(g: &UnitaryLabeledGraph) -> Result<EquivalenceReport> {
    let s = is_simple(g);
    if !s.simple {
        let cycle: Vec<String> = s
            .witness
            .unwrap_or_default()
            .iter()
            .map(Label::to_string)
            .collect();
        return Err(Error::precondition(format!(
            "graph is frustrated around the cycle {}",
            cycle.join(" -> ")
        )));
    }
    let f = spanning_forest(g);
    let d = g.d;
    let mut w = CMatrix::zeros(g.dim(), g.dim());
    for (v, frame) in f.frames.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                w[(v * d + i, v * d + j)] = frame[(i, j)];
            }
        }
    }
    let h = ulg_hamiltonian(g);
    let conj = h.conjugate_by(&w)?;
    let lap = g.laplacian();
    let want = lap.as_matrix().kron(&CMatrix::identity(d));
    let residual = conj.as_matrix().sub(&want)?.max_abs();

    let hv = eig_hermitian(&h, tol::EIG)?.eigenvalues;
    let lv = eig_hermitian(&lap, tol::EIG)?.eigenvalues;
    let spectrum_residual = hv
        .iter()
        .enumerate()
        .fold(0.0f64, |m, (k, v)| m.max((v - lv[k / d]).abs()));
    Ok(EquivalenceReport {
        residual,
        spectrum_residual,
    })
}

pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Pairwise distances `min { k : <u|H^k|v> != 0 }`, `None` when no power connects.
///
/// An entry of `H^k` counts as nonzero when it exceeds `zero_tol` times the same
/// entry of `|H|^k` (entrywise absolute values), so cancellation between walks
/// is detected while the overall growth of the powers does not matter. Powers
/// beyond `n - 1` are never needed by Cayley-Hamilton.
pub fn distances(h: &HermitianMatrix, zero_tol: f64) -> Result<Vec<Vec<Option<usize>>>> {
    if !(zero_tol > 0.0) {
        return Err(Error::invalid("zero tolerance must be positive"));
    }
    let n = h.dim();
    let mut dist: Vec<Vec<Option<usize>>> = (0..n)
        .map(|u| (0..n).map(|v| (u == v).then_some(0)).collect())
        .collect();
    let scale = h.as_matrix().max_abs();
    if scale == 0.0 || n < 2 {
        return Ok(dist);
    }
    let hs = h.as_matrix().scale(C64::new(1.0 / scale, 0.0));
    let habs: Vec<f64> = hs.data().iter().map(|z| z.norm()).collect();
    let mut p = CMatrix::identity(n);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = 1.0;
    }
    let mut open = n * n - n;
    for k in 1..n {
        p = p.matmul(&hs)?;
        let mut next = vec![0.0; n * n];
        for i in 0..n {
            for l in 0..n {
                let x = a[i * n + l];
                if x == 0.0 {
                    continue;
                }
                for j in 0..n {
                    next[i * n + j] += x * habs[l * n + j];
                }
            }
        }
        a = next;
        let m = a.iter().fold(0.0f64, |m, &x| m.max(x));
        if m > 0.0 {
            a.iter_mut().for_each(|x| *x /= m);
            p = p.scale(C64::new(1.0 / m, 0.0));
        }
        for u in 0..n {
            for v in 0..n {
                if dist[u][v].is_none()
                    && a[u * n + v] > 0.0
                    && p[(u, v)].norm() > zero_tol * a[u * n + v]
                {
                    dist[u][v] = Some(k);
                    open -= 1;
                }
            }
        }
        if open == 0 {
            break;
        }
    }
    Ok(dist)
}

fn max_distance(dist: &[Vec<Option<usize>>], states: &[usize]) -> Option<usize> {
    let mut worst = 0;
    for &u in states {
        for &v in states {
            worst = worst.max(dist[u][v]?);
        }
    }
    Some(worst)
}

/// `max_{u,v} dist(u, v)` over the computational basis; `None` means infinite.
pub fn matrix_diameter(h: &HermitianMatrix, zero_tol: f64) -> Result<Option<usize>> {
    let dist = distances(h, zero_tol)?;
    Ok(max_distance(&dist, &(0..h.dim()).collect::<Vec<_>>()))
}

/// Basis states with ground-state weight above this count as supported.
pub const SUPPORT_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiameterReport {
    pub dim: usize,
    pub diam: Option<usize>,
    pub pi_min: f64,
    pub gap: f64,
    /// Spectral norm.
    pub norm: f64,
    /// `(norm/2)(ln(2/pi_min)/diam)^2`, using the support-restricted pair when
    /// `support_fallback` is set.
    pub bound: f64,
    pub holds: bool,
    /// `bound / gap`.
    pub slack_factor: f64,
    /// Diameter and smallest weight restricted to the ground-state support.
    pub diam_support: Option<usize>,
    pub pi_min_support: f64,
    /// Gap of `(H - E0)/(norm - E0)`.
    pub normalized_gap: f64,
    /// `(1 + 1/sqrt(2 gap_G)) ln(2/pi_min')`.
    pub support_bound: f64,
    pub support_holds: bool,
    pub support_fallback: bool,
}

pub fn diameter_bound_check(h: &HermitianMatrix) -> Result<DiameterReport> {
    let dec: EigenDecomposition = eig_hermitian(h, tol::EIG)?;
    let gs = dec.ground_state();
    if gs.degenerate {
        return Err(Error::precondition(
            "diameter bound needs a non-degenerate ground state",
        ));
    }
    let gap = dec.gap()?;
    let norm = dec.norm();
    let pi: Vec<f64> = gs.vector.iter().map(|z| z.norm_sqr()).collect();
    let pi_min = pi.iter().copied().fold(f64::INFINITY, f64::min);
    let support: Vec<usize> = (0..pi.len()).filter(|&i| pi[i] > SUPPORT_TOL).collect();
    let pi_min_support = support.iter().map(|&i| pi[i]).fold(f64::INFINITY, f64::min);

    let dist = distances(h, DEFAULT_ZERO_TOL)?;
    let all: Vec<usize> = (0..h.dim()).collect();
    let diam = max_distance(&dist, &all);
    let diam_support = max_distance(&dist, &support);
    let support_fallback = pi_min <= SUPPORT_TOL;

    let (dm, pm) = if support_fallback {
        (diam_support, pi_min_support)
    } else {
        (diam, pi_min)
    };
    let bound = match dm {
        None => 0.0,
        Some(0) => f64::INFINITY,
        Some(k) => norm / 2.0 * ((2.0 / pm).ln() / k as f64).powi(2),
    };
    let slack = 1e-9;
    let lambda_min = dec.eigenvalues[0];
    let spread = norm - lambda_min;
    let normalized_gap = if spread > 0.0 { gap / spread } else { 0.0 };
    let support_bound = (1.0 + 1.0 / (2.0 * normalized_gap).sqrt()) * (2.0 / pi_min_support).ln();
    let support_holds = match diam_support {
        Some(k) => k as f64 <= support_bound + slack,
        None => false,
    };
    Ok(DiameterReport {
        dim: h.dim(),
        diam,
        pi_min,
        gap,
        norm,
        bound,
        holds: gap <= bound + slack,
        slack_factor: bound / gap,
        diam_support,
        pi_min_support,
        normalized_gap,
        support_bound,
        support_holds,
        support_fallback,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrustratedPair {
    pub h_g: HermitianMatrix,
    /// `H_G` in the eigenbasis of `I + U` on both vertices.
    pub transformed: HermitianMatrix,
    /// Eigenvalues of `I + U`, ordered by decreasing modulus.
    #[serde(skip)]
    pub lambdas: Vec<C64>,
    /// `2 - |lambda_i|`.
    pub penalties: Vec<f64>,
}

/// The two-vertex graph with a double edge `{I, U}` and its decoupled form.
pub fn frustrated_pair_analysis(u: &CMatrix) -> Result<FrustratedPair> {
    let g = UnitaryLabeledGraph::double_edge(u)?;
    let h_g = ulg_hamiltonian(&g);
    let d = u.rows();

    // a generic real combination of the commuting Hermitian parts separates
    // distinct eigenvalues of U, so its eigenvectors diagonalize U
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    let herm = u.add(&u.adjoint())?.scale(C64::new(0.5, 0.0));
    let anti = u.sub(&u.adjoint())?.scale(C64::new(0.0, -0.5));
    let probe = HermitianMatrix::new(herm.add(&anti.scale(C64::new(alpha, 0.0)))?)?;
    let basis = eig_hermitian(&probe, tol::EIG)?.eigenvectors;
    let ipu = CMatrix::identity(d).add(u)?;
    let diag = basis.adjoint().matmul(&ipu.matmul(&basis)?)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| diag[(j, j)].norm().total_cmp(&diag[(i, i)].norm()));
    let cols: Vec<Vec<C64>> = order.iter().map(|&j| basis.column(j)).collect();
    let v = CMatrix::from_columns(d, &cols);
    let lambdas: Vec<C64> = order.iter().map(|&j| diag[(j, j)]).collect();

    let block = CMatrix::identity(2).kron(&v);
    let transformed = h_g.conjugate_by(&block)?;
    let lam = CMatrix::diagonal(&lambdas);
    let mut want = CMatrix::identity(2 * d).scale(C64::new(2.0, 0.0));
    for i in 0..d {
        for j in 0..d {
            want[(d + i, j)] = -lam[(i, j)];
            want[(i, d + j)] = -lam[(j, i)].conj();
        }
    }
    let off = transformed.as_matrix().sub(&want)?.max_abs();
    if off > 1e-9 {
        return Err(Error::NotConverged {
            iterations: 1,
            residual: off,
        });
    }
    let penalties: Vec<f64> = lambdas.iter().map(|l| 2.0 - l.norm()).collect();
    if penalties
        .iter()
        .any(|&p| !(-1e-12..=2.0 + 1e-12).contains(&p))
    {
        return Err(Error::invalid(
            "eigenvalue of I + U outside the disk of radius 2",
        ));
    }
    Ok(FrustratedPair {
        h_g,
        transformed,
        lambdas,
        penalties,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowEnergyReport {
    /// `<phi|H|phi>` of the constructed state.
    pub energy: f64,
    #[serde(skip)]
    pub state: Vec<C64>,
    /// Number of eigenvalues at most `R`.
    pub k: usize,
    /// Largest amplitude left on a penalized basis state.
    pub max_penalty_amplitude: f64,
}

/// Lowest-energy state in the span of eigenvectors with energy at most `r`
/// that vanishes on every penalized basis state. Any penalty supported there
/// then leaves the ground energy at most `energy <= r`.
pub fn low_energy_unsat_upper_bound(
    h: &HermitianMatrix,
    penalty_states: &[usize],
    r: f64,
) -> Result<LowEnergyReport> {
    if let Some(&p) = penalty_states.iter().find(|&&p| p >= h.dim()) {
        return Err(Error::invalid(format!("penalty state {p} out of range")));
    }
    let dec = eig_hermitian(h, tol::EIG)?;
    let slack = 1e-12 * dec.norm().max(1.0);
    let k = dec.eigenvalues.iter().filter(|&&e| e <= r + slack).count();
    let m = penalty_states.len();
    if k < m + 1 {
        return Err(Error::precondition(format!(
            "only {k} eigenvalues are at most {r}, but {m} penalized states need {}",
            m + 1
        )));
    }
    // constraint rows: amplitudes of the low eigenvectors on penalized states
    let a = CMatrix::from_fn(m.max(1), k, |i, j| {
        if m == 0 {
            ZERO
        } else {
            dec.eigenvectors[(penalty_states[i], j)]
        }
    });
    let gram = HermitianMatrix::new(a.adjoint().matmul(&a)?)?;
    let gdec = eig_hermitian(&gram, tol::EIG)?;
    let cut = 1e-12 * gdec.norm().max(1e-300);
    let null_dim = gdec
        .eigenvalues
        .iter()
        .filter(|&&x| x <= cut)
        .count()
        .max(k - m);
    let null = CMatrix::from_columns(
        k,
        &(0..null_dim).map(|j| gdec.vector(j)).collect::<Vec<_>>(),
    );
    let energies = CMatrix::diagonal(
        &dec.eigenvalues[..k]
            .iter()
            .map(|&e| C64::new(e, 0.0))
            .collect::<Vec<_>>(),
    );
    let reduced = HermitianMatrix::new(null.adjoint().matmul(&energies.matmul(&null)?)?)?;
    let coeffs = null.mul_vec(&eig_hermitian(&reduced, tol::EIG)?.vector(0));
    let low = CMatrix::from_fn(h.dim(), k, |i, j| dec.eigenvectors[(i, j)]);
    let mut state = low.mul_vec(&coeffs);
    crate::spectral::normalize(&mut state);
    let max_penalty_amplitude = penalty_states
        .iter()
        .fold(0.0f64, |x, &p| x.max(state[p].norm()));
    Ok(LowEnergyReport {
        energy: h.expectation(&state),
        state,
        k,
        max_penalty_amplitude,
    })
}

/// Pauli `X`.
pub fn sigma_x() -> CMatrix {
    CMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).expect("2 x 2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clockham::{endpoint_penalized_clock, kitaev_clock, theorem1_matrix};
    use proptest::prelude::*;

    fn su2(a: f64, b: f64, c: f64) -> CMatrix {
        let (s, co) = a.sin_cos();
        CMatrix::from_vec(
            2,
            2,
            vec![
                C64::from_polar(co, b),
                C64::from_polar(s, c),
                -C64::from_polar(s, -c),
                C64::from_polar(co, -b),
            ],
        )
        .unwrap()
    }

    fn fig1(u1: &CMatrix, u2: &CMatrix) -> UnitaryLabeledGraph {
        let u3 = u2.matmul(u1).unwrap().adjoint();
        let e = |a: i64, b: i64, u: CMatrix| UlgEdge {
            a: a.into(),
            b: b.into(),
            unitary: u,
            weight: None,
        };
        let id = CMatrix::identity(2);
        UnitaryLabeledGraph::new(
            (1..=5).map(Label::Int).collect(),
            vec![
                e(1, 2, u1.clone()),
                e(2, 3, u2.clone()),
                e(3, 4, u3),
                e(4, 1, id.clone()),
                e(4, 5, id),
            ],
            2,
        )
        .unwrap()
    }

    #[test]
    fn single_edge() {
        let g = UnitaryLabeledGraph::path(vec![CMatrix::identity(1)]).unwrap();
        let want = HermitianMatrix::from_real_rows(&[&[1.0, -1.0], &[-1.0, 1.0]]).unwrap();
        assert_eq!(ulg_hamiltonian(&g), want);
    }

    #[test]
    fn double_edge_sigma_x() {
        let g = UnitaryLabeledGraph::double_edge(&sigma_x()).unwrap();
        let want = HermitianMatrix::from_real_rows(&[
            &[2.0, 0.0, -1.0, -1.0],
            &[0.0, 2.0, -1.0, -1.0],
            &[-1.0, -1.0, 2.0, 0.0],
            &[-1.0, -1.0, 0.0, 2.0],
        ])
        .unwrap();
        assert_eq!(ulg_hamiltonian(&g), want);
        let s = is_simple(&g);
        assert!(!s.simple);
        assert_eq!(
            s.witness.unwrap(),
            vec![Label::from("b"), Label::from("a"), Label::from("b")]
        );
        assert!(matches!(
            laplacian_equivalence_check(&g),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rejects_bad_graphs() {
        let e = |a: i64, b: i64| UlgEdge {
            a: a.into(),
            b: b.into(),
            unitary: CMatrix::identity(1),
            weight: None,
        };
        let v = vec![Label::Int(0), Label::Int(1)];
        assert!(UnitaryLabeledGraph::new(v.clone(), vec![e(0, 1), e(0, 1)], 1).is_err());
        assert!(UnitaryLabeledGraph::new(v.clone(), vec![e(0, 0)], 1).is_err());
        assert!(UnitaryLabeledGraph::new(v.clone(), vec![e(0, 2)], 1).is_err());
        assert!(UnitaryLabeledGraph::new(v, vec![e(0, 1), e(1, 0)], 1).is_ok());
    }

    #[test]
    fn path_spectrum_matches_laplacian() {
        let us = vec![su2(0.3, 1.0, 2.0), su2(1.1, -0.4, 0.2), su2(2.0, 0.7, -1.3)];
        let g = UnitaryLabeledGraph::path(us).unwrap();
        assert!(is_simple(&g).simple);
        let r = laplacian_equivalence_check(&g).unwrap();
        assert!(r.residual < 1e-12 && r.spectrum_residual < 1e-12);
    }

    #[test]
    fn five_vertex_loop_graph() {
        let g = fig1(&su2(0.4, 0.2, 1.0), &su2(1.2, -0.5, 0.3));
        let s = is_simple(&g);
        assert!(s.simple, "{s:?}");
        let r = laplacian_equivalence_check(&g).unwrap();
        assert!(r.residual < 1e-9 && r.spectrum_residual < 1e-9);

        let id = fig1(&CMatrix::identity(2), &CMatrix::identity(2));
        assert_eq!(
            ulg_hamiltonian(&id).as_matrix(),
            &id.laplacian().as_matrix().kron(&CMatrix::identity(2))
        );
    }

    #[test]
    fn tree_is_simple() {
        let e = |a: i64, b: i64, u: CMatrix| UlgEdge {
            a: a.into(),
            b: b.into(),
            unitary: u,
            weight: None,
        };
        let g = UnitaryLabeledGraph::new(
            (0..4).map(Label::Int).collect(),
            vec![
                e(0, 1, sigma_x()),
                e(0, 2, su2(1.0, 2.0, 3.0)),
                e(3, 0, su2(0.1, 0.2, 0.3)),
            ],
            2,
        )
        .unwrap();
        let s = is_simple(&g);
        assert!(s.simple && s.max_defect == 0.0);
    }

    #[test]
    fn weighted_equivalence() {
        let mut g = fig1(&su2(0.9, 0.1, -0.6), &su2(0.2, 1.5, 0.5));
        g.edges[2].weight = Some(0.5);
        let g = UnitaryLabeledGraph::new(g.vertices.clone(), g.edges.clone(), 2)
            .unwrap()
            .with_vertex_weights(vec![0.0, 0.3, 0.0, 1.0, 0.2])
            .unwrap();
        let r = laplacian_equivalence_check(&g).unwrap();
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn diameter_examples() {
        for t in 1..=64 {
            let h = kitaev_clock(t).unwrap().to_hermitian();
            assert_eq!(
                matrix_diameter(&h, DEFAULT_ZERO_TOL).unwrap(),
                Some(t),
                "T = {t}"
            );
        }
        let diag = HermitianMatrix::diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(matrix_diameter(&diag, DEFAULT_ZERO_TOL).unwrap(), None);
        assert_eq!(
            matrix_diameter(&HermitianMatrix::identity(1), DEFAULT_ZERO_TOL).unwrap(),
            Some(0)
        );
    }

    #[test]
    fn diameter_sees_cancellation() {
        // the two walks 0 -> 1 -> 3 and 0 -> 2 -> 3 cancel
        let h = HermitianMatrix::from_real_rows(&[
            &[0.0, 1.0, 1.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
            &[1.0, 0.0, 0.0, -1.0],
            &[0.0, 1.0, -1.0, 0.0],
        ])
        .unwrap();
        let d = distances(&h, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(d[0][3], None);
        assert_eq!(d[0][1], Some(1));
    }

    #[test]
    fn diameter_bound_on_clocks() {
        for t in [20, 50, 100] {
            let r =
                diameter_bound_check(&endpoint_penalized_clock(t).unwrap().to_hermitian()).unwrap();
            assert_eq!(r.diam, Some(t));
            assert!(r.holds && r.support_holds, "{r:?}");
        }
        let r = diameter_bound_check(&theorem1_matrix(100).unwrap().to_hermitian()).unwrap();
        assert!(r.holds && r.slack_factor >= 1.0, "{r:?}");
    }

    #[test]
    fn two_site_boundary_case() {
        let h = HermitianMatrix::from_real_rows(&[&[1.0, -1.0], &[-1.0, 1.0]]).unwrap();
        let r = diameter_bound_check(&h).unwrap();
        assert_eq!(r.diam, Some(1));
        assert!((r.pi_min - 0.5).abs() < 1e-15);
        assert!((r.gap - 2.0).abs() < 1e-14);
        assert!((r.bound - 4f64.ln().powi(2)).abs() < 1e-12);
        // the gap exceeds the bound here
        assert!(!r.holds);
        assert!(r.support_holds);
    }

    #[test]
    fn support_fallback() {
        // ground state lives on the first two sites only
        let h = HermitianMatrix::from_real_rows(&[
            &[1.0, -1.0, 0.0],
            &[-1.0, 1.0, 0.0],
            &[0.0, 0.0, 3.0],
        ])
        .unwrap();
        let r = diameter_bound_check(&h).unwrap();
        assert!(r.support_fallback);
        assert_eq!(r.diam, None);
        assert_eq!(r.diam_support, Some(1));
        assert!(matches!(
            diameter_bound_check(&HermitianMatrix::identity(2)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn frustrated_examples() {
        let f = frustrated_pair_analysis(&sigma_x()).unwrap();
        let want = HermitianMatrix::from_real_rows(&[
            &[2.0, 0.0, -2.0, 0.0],
            &[0.0, 2.0, 0.0, 0.0],
            &[-2.0, 0.0, 2.0, 0.0],
            &[0.0, 0.0, 0.0, 2.0],
        ])
        .unwrap();
        assert!(f.transformed.sub(&want).unwrap().as_matrix().max_abs() < 1e-12);
        assert!(f.penalties[0].abs() < 1e-12 && (f.penalties[1] - 2.0).abs() < 1e-12);

        let f = frustrated_pair_analysis(&CMatrix::identity(3)).unwrap();
        assert!(f.penalties.iter().all(|p| p.abs() < 1e-12));

        let u = CMatrix::diagonal(&[ONE, C64::new(0.0, 1.0)]);
        let f = frustrated_pair_analysis(&u).unwrap();
        assert!(f.penalties[0].abs() < 1e-12);
        assert!((f.penalties[1] - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn low_energy_examples() {
        let t = 30;
        let h = kitaev_clock(t).unwrap().to_hermitian();
        let vals = eig_hermitian(&h, 1e-10).unwrap().eigenvalues;

        let r = low_energy_unsat_upper_bound(&h, &[t], vals[1]).unwrap();
        assert!(r.energy <= vals[1] + 1e-12);
        assert!(r.max_penalty_amplitude < 1e-10);

        let r = low_energy_unsat_upper_bound(&h, &[], vals[0]).unwrap();
        assert!((r.energy - vals[0]).abs() < 1e-12);

        let r = low_energy_unsat_upper_bound(&h, &[0, t], vals[2]).unwrap();
        assert_eq!(r.k, 3);
        assert!(r.max_penalty_amplitude < 1e-10);

        assert!(matches!(
            low_energy_unsat_upper_bound(&h, &[0, t], vals[1]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"vertices":[0,1,"x"],"d":1,"edges":[
            {"a":0,"b":1,"unitary":[[[1,0]]]},
            {"a":1,"b":"x","unitary":[[[0,1]]],"weight":0.5}]}"#;
        let g: UnitaryLabeledGraph = serde_json::from_str(json).unwrap();
        assert_eq!(g.dim(), 3);
        let back: UnitaryLabeledGraph =
            serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        let bad = r#"{"vertices":[0,1],"d":1,"edges":[{"a":0,"b":1,"unitary":[[[2,0]]]}]}"#;
        assert!(serde_json::from_str::<UnitaryLabeledGraph>(bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn reversing_an_edge_keeps_the_verdict(
            angles in prop::collection::vec((0.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0), 3),
            flip in 0usize..3,
            consistent in any::<bool>(),
        ) {
            let u: Vec<CMatrix> = angles.iter().map(|&(a, b, c)| su2(a, b, c)).collect();
            // triangle 0 -> 1 -> 2 -> 0
            let closing = if consistent {
                u[1].matmul(&u[0]).unwrap().adjoint()
            } else {
                u[2].clone()
            };
            let labels = [u[0].clone(), u[1].clone(), closing];
            let ends = [(0i64, 1i64), (1, 2), (2, 0)];
            let build = |flip: Option<usize>| {
                let edges = ends.iter().zip(&labels).enumerate().map(|(i, (&(a, b), m))| {
                    if Some(i) == flip {
                        UlgEdge { a: b.into(), b: a.into(), unitary: m.adjoint(), weight: None }
                    } else {
                        UlgEdge { a: a.into(), b: b.into(), unitary: m.clone(), weight: None }
                    }
                }).collect();
                UnitaryLabeledGraph::new((0..3).map(Label::Int).collect(), edges, 2).unwrap()
            };
            prop_assert_eq!(is_simple(&build(None)).simple, is_simple(&build(Some(flip))).simple);
            if consistent {
                prop_assert!(is_simple(&build(None)).simple);
            }
        }

        #[test]
        fn frustrated_penalties_in_range(a in 0.0f64..3.2, b in -3.2f64..3.2, c in -3.2f64..3.2) {
            let f = frustrated_pair_analysis(&su2(a, b, c)).unwrap();
            for p in &f.penalties {
                prop_assert!((-1e-12..=2.0 + 1e-12).contains(p));
            }
        }
    }
}

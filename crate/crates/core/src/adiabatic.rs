//! Adiabatic interpolation schedules and gap sweeps along them.

use serde::Serialize;

use crate::clockham::{kitaev_clock, theorem1_matrix};
use crate::error::{Error, Result};
use crate::spectral::{eig_hermitian, inner, EigenDecomposition, HermitianMatrix, SymTridiagonal};
use crate::tol;

/// Either a real symmetric tridiagonal (fast path) or a dense Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Tridiagonal(SymTridiagonal),
    Dense(HermitianMatrix),
}

impl Operator {
    pub fn dim(&self) -> usize {
        match self {
            Operator::Tridiagonal(t) => t.dim(),
            Operator::Dense(h) => h.dim(),
        }
    }

    pub fn to_hermitian(&self) -> HermitianMatrix {
        match self {
            Operator::Tridiagonal(t) => t.to_hermitian(),
            Operator::Dense(h) => h.clone(),
        }
    }

    /// `x * self + y * other`.
    fn combine(&self, x: f64, other: &Operator, y: f64) -> Result<Operator> {
        match (self, other) {
            (Operator::Tridiagonal(a), Operator::Tridiagonal(b)) => {
                Ok(Operator::Tridiagonal(a.scale(x).add(&b.scale(y))?))
            }
            _ => Ok(Operator::Dense(
                self.to_hermitian()
                    .scale(x)
                    .add(&other.to_hermitian().scale(y))?,
            )),
        }
    }

    /// Two lowest eigenvalues.
    fn lowest_pair(&self) -> Result<(f64, f64)> {
        if self.dim() < 2 {
            return Err(Error::GapUndefined(self.dim()));
        }
        match self {
            Operator::Tridiagonal(t) => Ok((t.kth_eigenvalue(0), t.kth_eigenvalue(1))),
            Operator::Dense(h) => {
                let v = eig_hermitian(h, tol::EIG)?.eigenvalues;
                Ok((v[0], v[1]))
            }
        }
    }

    fn eig(&self) -> Result<EigenDecomposition> {
        match self {
            Operator::Tridiagonal(t) => t.eig(tol::EIG),
            Operator::Dense(h) => eig_hermitian(h, tol::EIG),
        }
    }
}

impl From<SymTridiagonal> for Operator {
    fn from(t: SymTridiagonal) -> Self {
        Operator::Tridiagonal(t)
    }
}

impl From<HermitianMatrix> for Operator {
    fn from(h: HermitianMatrix) -> Self {
        Operator::Dense(h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ScheduleKind {
    /// `(1 - s) H_init + s H_final`.
    StandardLinear,
    /// `H_init + s A H_final`.
    ModifiedScaled { a: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    h_init: Operator,
    h_final: Operator,
}

/// `diag(0, 1, ..., 1)` on `T + 1` clock sites.
pub fn init_hamiltonian(t: usize) -> SymTridiagonal {
    let mut diag = vec![1.0; t + 1];
    diag[0] = 0.0;
    SymTridiagonal::new(diag, vec![0.0; t]).expect("lengths agree")
}

impl Schedule {
    pub fn standard(h_init: impl Into<Operator>, h_final: impl Into<Operator>) -> Result<Self> {
        Self::build(ScheduleKind::StandardLinear, h_init.into(), h_final.into())
    }

    pub fn modified(
        h_init: impl Into<Operator>,
        h_final: impl Into<Operator>,
        a: f64,
    ) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid(format!(
                "schedule scale must be positive, got {a}"
            )));
        }
        Self::build(
            ScheduleKind::ModifiedScaled { a },
            h_init.into(),
            h_final.into(),
        )
    }

    fn build(kind: ScheduleKind, h_init: Operator, h_final: Operator) -> Result<Self> {
        if h_init.dim() != h_final.dim() {
            return Err(Error::DimensionMismatch {
                expected: h_init.dim(),
                found: h_final.dim(),
            });
        }
        Ok(Schedule {
            kind,
            h_init,
            h_final,
        })
    }

    /// Linear interpolation into the path-graph clock scaled by 1/4, so its
    /// interior entries match those of [`theorem1_matrix`].
    pub fn clock_standard(t: usize) -> Result<Self> {
        Self::standard(init_hamiltonian(t), kitaev_clock(t)?.scale(0.25))
    }

    /// Linear interpolation into the weighted clock with endpoint weight 1/4.
    pub fn clock_weighted(t: usize) -> Result<Self> {
        Self::standard(init_hamiltonian(t), theorem1_matrix(t)?)
    }

    /// `H_init + s T^4 H*` with `H*` the weighted clock.
    pub fn clock_modified(t: usize) -> Result<Self> {
        Self::modified(init_hamiltonian(t), theorem1_matrix(t)?, (t as f64).powi(4))
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn h_init(&self) -> &Operator {
        &self.h_init
    }

    pub fn h_final(&self) -> &Operator {
        &self.h_final
    }

    pub fn dim(&self) -> usize {
        self.h_init.dim()
    }

    pub fn operator_at(&self, s: f64) -> Result<Operator> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid(format!(
                "schedule parameter {s} outside [0, 1]"
            )));
        }
        match self.kind {
            ScheduleKind::StandardLinear => self.h_init.combine(1.0 - s, &self.h_final, s),
            ScheduleKind::ModifiedScaled { a } => self.h_init.combine(1.0, &self.h_final, s * a),
        }
    }
}

pub fn interpolate(sch: &Schedule, s: f64) -> Result<HermitianMatrix> {
    Ok(sch.operator_at(s)?.to_hermitian())
}

/// `k` evenly spaced points on `[0, 1]`.
pub fn uniform_grid(k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..k).map(|i| i as f64 / (k - 1) as f64).collect(),
    }
}

pub const DEFAULT_GRID: usize = 201;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapPoint {
    pub s: f64,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapCurve {
    pub points: Vec<GapPoint>,
    /// Smallest gap on the grid and after refinement.
    pub min_gap: f64,
    pub argmin: f64,
    /// Index of the smallest grid gap.
    pub grid_argmin: usize,
}

fn gap_point(sch: &Schedule, s: f64) -> Result<GapPoint> {
    let (e0, e1) = sch.operator_at(s)?.lowest_pair()?;
    Ok(GapPoint {
        s,
        e0,
        e1,
        gap: e1 - e0,
    })
}

pub fn gap_sweep(sch: &Schedule, grid: &[f64]) -> Result<GapCurve> {
    if grid.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("grid must be strictly increasing"));
    }
    let points = grid
        .iter()
        .map(|&s| gap_point(sch, s))
        .collect::<Result<Vec<_>>>()?;
    let k = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.gap.total_cmp(&b.1.gap))
        .map(|(i, _)| i)
        .expect("non-empty");
    let (mut min_gap, mut argmin) = (points[k].gap, points[k].s);
    if points.len() > 1 {
        let lo = points[k.saturating_sub(1)].s;
        let hi = points[(k + 1).min(points.len() - 1)].s;
        let (s, g) = golden_min(|s| gap_point(sch, s).map(|p| p.gap), lo, hi, 1e-4)?;
        if g < min_gap {
            min_gap = g;
            argmin = s;
        }
    }
    Ok(GapCurve {
        points,
        min_gap,
        argmin,
        grid_argmin: k,
    })
}

fn golden_min(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    // the bracket ends are candidates too, since the minimum may sit on the boundary
    let mut best = if fc < fd { (c, fc) } else { (d, fd) };
    for s in [a, b] {
        let v = f(s)?;
        if v < best.1 {
            best = (s, v);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub monotone: bool,
    /// `(s_prev, s, E1(s_prev) - E1(s))` at the first decrease beyond the slack.
    pub first_violation: Option<(f64, f64, f64)>,
}

/// Checks that the first excited energy never decreases along the grid.
/// Only meaningful for the scaled schedule with a positive semidefinite final term.
pub fn monotone_excited_check(sch: &Schedule, grid: &[f64]) -> Result<MonotoneReport> {
    if sch.kind == ScheduleKind::StandardLinear {
        return Err(Error::precondition(
            "monotonicity needs the scaled schedule, whose increments are positive semidefinite",
        ));
    }
    let lowest = sch
        .h_final
        .lowest_pair()
        .map(|p| p.0)
        .or_else(|e| match e {
            Error::GapUndefined(_) => Ok(sch.h_final.to_hermitian().get(0, 0).re),
            e => Err(e),
        })?;
    if lowest < -1e-9 {
        return Err(Error::precondition(format!(
            "final term is not positive semidefinite (lowest eigenvalue {lowest:.3e})"
        )));
    }
    let curve = grid
        .iter()
        .map(|&s| gap_point(sch, s))
        .collect::<Result<Vec<_>>>()?;
    let first_violation = curve
        .windows(2)
        .find(|w| w[1].e1 < w[0].e1 - 1e-9 * w[0].e1.abs().max(1.0))
        .map(|w| (w[0].s, w[1].s, w[0].e1 - w[1].e1));
    Ok(MonotoneReport {
        monotone: first_violation.is_none(),
        first_violation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapReport {
    /// `|<psi~|psi*_0>|` with `psi~` the ground state of `H* + H_init / A`.
    pub overlap: f64,
    /// `|| psi~ - psi*_0 ||_2` after aligning the global phase.
    pub deviation: f64,
    /// `A^-1 Delta^-1 sum_k |<psi*_0|H_init|psi*_k>|`.
    pub first_order_bound: f64,
    /// Endpoint weight `|<T|psi*_0>|^2` of the unperturbed ground state.
    pub endpoint_weight: f64,
}

pub fn final_overlap_estimate(sch: &Schedule) -> Result<OverlapReport> {
    let a = match sch.kind {
        ScheduleKind::ModifiedScaled { a } => a,
        ScheduleKind::StandardLinear => {
            return Err(Error::precondition(
                "overlap estimate applies to the scaled schedule",
            ))
        }
    };
    let prop = sch.h_final.eig()?;
    let psi0 = prop.vector(0);
    let gap = prop.gap()?;
    let h_init = sch.h_init.to_hermitian();
    let hp = h_init.mul_vec(&psi0);
    let sum: f64 = (1..prop.dim())
        .map(|k| inner(&hp, &prop.vector(k)).norm())
        .sum();
    let first_order_bound = sum / (a * gap);

    let perturbed = sch.h_final.combine(1.0, &sch.h_init, 1.0 / a)?;
    let psi = perturbed.eig()?.vector(0);
    let ov = inner(&psi, &psi0);
    let overlap = ov.norm();
    let phase = if overlap > 0.0 { ov / overlap } else { ov };
    let deviation = psi
        .iter()
        .zip(&psi0)
        .map(|(x, y)| (x * phase - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(OverlapReport {
        overlap: overlap.min(1.0),
        deviation,
        first_order_bound,
        endpoint_weight: psi0[psi0.len() - 1].norm_sqr(),
    })
}

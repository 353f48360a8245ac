use clockforge::adiabatic::{gap_sweep, monotone_excited_check, uniform_grid};
use clockforge::circuitham::{
    clock_tensor_identity, h_prop, history_unitary, lemma2_sandwich, padded_construction, Circuit,
    PenaltyPair,
};
use clockforge::clockham::{
    dirichlet_ansatz, endpoint_penalized_clock, endpoint_penalized_energy, kitaev_clock,
    metropolis_hamiltonian, s_block_case_closed_forms, s_block_case_values,
    stoquastic_lower_bound_tridiagonal, theorem1_distribution, theorem1_matrix, ClockWeights,
    SBlockParams, TimeDistribution,
};
use clockforge::ensembles;
use clockforge::markovmap::{
    birth_death_ell, cheeger_check, quantum_to_classical, tridiag_product_bound, ClassicalMapping,
    CutStrategy, EXACT_CONDUCTANCE_MAX_T,
};
use clockforge::spectral::eig_hermitian;
use clockforge::ulg::{diameter_bound_check, matrix_diameter, DEFAULT_ZERO_TOL};
use clockforge::{tol, HermitianMatrix, SymTridiagonal};
use rand::Rng;

use super::adiabatic::schedule;
use super::circuit::weights;
use super::{relative_change, require_t, Ctx};
use crate::config::{ScheduleChoice, VerifyCmd};
use crate::error::{CliError, Context};
use crate::output::{Cell, Outcome, Table};
use crate::row;

/// Allowed drift of `gap * T^2` between consecutive sweep points.
const MAX_DRIFT: f64 = 0.1;

fn finish(columns: &[&str], rows: Vec<Vec<Cell>>, pass: bool, summary: String) -> Outcome {
    let mut table = Table::new(columns);
    rows.into_iter().for_each(|r| table.push(r));
    Outcome::table(table).verdict(pass, summary)
}

fn last_bool(rows: &[Vec<Cell>]) -> bool {
    rows.iter()
        .all(|r| matches!(r.last(), Some(Cell::Bool(true))))
}

fn sq(t: usize) -> f64 {
    (t * t) as f64
}

/// `(|E0|, max |psi_t - sqrt(pi_t)|)` for the Metropolis clock of `pi`.
fn frustration_free(pi: &TimeDistribution) -> Result<(f64, f64), CliError> {
    let g = metropolis_hamiltonian(pi)
        .ground_state()
        .numerics("clockham")?;
    let amp = pi.pi().iter().zip(&g.vector).fold(0.0f64, |m, (p, z)| {
        m.max((p.sqrt() - z.re).abs().max(z.im.abs()))
    });
    Ok((g.energy.abs(), amp))
}

fn entry_defect(a: &SymTridiagonal, b: &SymTridiagonal) -> f64 {
    let d = a.diag().iter().zip(b.diag()).map(|(x, y)| (x - y).abs());
    let o = a
        .offdiag()
        .iter()
        .zip(b.offdiag())
        .map(|(x, y)| (x - y).abs());
    d.chain(o).fold(0.0, f64::max)
}

pub fn run(cmd: &VerifyCmd, ctx: &Ctx) -> Result<Outcome, CliError> {
    let tol = ctx.tol;
    match cmd {
        VerifyCmd::Theorem1 { t } => {
            require_t(t)?;
            if t.contains(&1) {
                return Err(CliError::Config("the weighted clock needs T >= 2".into()));
            }
            let vals = ctx.map(t, |&t| {
                let pi = theorem1_distribution(t).input()?;
                let (e0, amp) = frustration_free(&pi)?;
                let h = theorem1_matrix(t).input()?;
                let defect = entry_defect(&h, &metropolis_hamiltonian(&pi));
                let gap = h.spectral_gap().numerics("spectral")?;
                Ok((t, e0, amp, defect, gap))
            })?;
            let mut rows = Vec::new();
            let mut prev: Option<f64> = None;
            let mut worst_drift = 0.0f64;
            for (t, e0, amp, defect, gap) in vals {
                let scaled = gap * sq(t);
                let drift = prev.map(|p| relative_change(p, scaled));
                worst_drift = worst_drift.max(drift.unwrap_or(0.0));
                prev = Some(scaled);
                let ok = e0 <= tol
                    && amp <= tol
                    && defect <= tol
                    && scaled > 0.0
                    && drift.is_none_or(|d| d < MAX_DRIFT);
                rows.push(row![t, e0, amp, defect, gap, scaled, drift, ok]);
            }
            let pass = last_bool(&rows);
            Ok(finish(
                &[
                    "T",
                    "E0",
                    "amplitude_error",
                    "matrix_defect",
                    "gap",
                    "gap_T2",
                    "drift",
                    "holds",
                ],
                rows,
                pass,
                format!("gap*T^2 drift at most {:.2}% per step", 100.0 * worst_drift),
            ))
        }
        VerifyCmd::Theorem2 { t, grid } => {
            require_t(t)?;
            if *grid < 2 {
                return Err(CliError::Config("--grid needs at least 2 points".into()));
            }
            let g = uniform_grid(*grid);
            let rows = ctx.map(t, |&t| {
                let modified = schedule(ScheduleChoice::Modified, t)?;
                let curve = gap_sweep(&modified, &g).numerics("adiabatic")?;
                let grid_min = curve
                    .points
                    .iter()
                    .map(|p| p.gap)
                    .fold(f64::INFINITY, f64::min);
                let monotone = monotone_excited_check(&modified, &g)
                    .numerics("adiabatic")?
                    .monotone;
                let pi_t = theorem1_matrix(t)
                    .input()?
                    .ground_state()
                    .numerics("spectral")?
                    .vector[t]
                    .norm_sqr();
                let standard =
                    gap_sweep(&schedule(ScheduleChoice::Standard, t)?, &g).numerics("adiabatic")?;
                let weighted =
                    gap_sweep(&schedule(ScheduleChoice::Weighted, t)?, &g).numerics("adiabatic")?;
                let ok = grid_min >= 0.25 - tol && monotone && (pi_t - 0.25).abs() <= tol;
                Ok(row![
                    t,
                    grid_min,
                    monotone,
                    pi_t,
                    1.0 / (t + 1) as f64,
                    standard.argmin,
                    weighted.argmin,
                    ok
                ])
            })?;
            let pass = last_bool(&rows);
            Ok(finish(
                &[
                    "T",
                    "min_gap",
                    "excited_monotone",
                    "pi_T",
                    "pi_T_standard",
                    "argmin_standard",
                    "argmin_weighted",
                    "holds",
                ],
                rows,
                pass,
                "modified schedule gap >= 1/4 with E1 non-decreasing and pi_T = 1/4".into(),
            ))
        }
        VerifyCmd::Theorem3 { t } => {
            require_t(t)?;
            let rows = ctx.map(t, |&t| {
                let h = endpoint_penalized_clock(t).input()?;
                let exact = endpoint_penalized_energy(t);
                let e0 = h.kth_eigenvalue(0);
                let lb = stoquastic_lower_bound_tridiagonal(&h, &dirichlet_ansatz(t))
                    .numerics("clockham")?;
                let mut cases = 0.0f64;
                for (mu, eta) in [(1.0, 0.0), (0.9, 0.2), (0.75, 0.5), (0.6, 0.8)] {
                    let p = SBlockParams::new(t, mu, eta).input()?;
                    let v = s_block_case_values(&p).numerics("clockham")?;
                    let c = s_block_case_closed_forms(&p);
                    for d in [
                        v.first - c.first,
                        v.interior - c.interior,
                        v.coupled_first - c.coupled_first,
                        v.coupled_second - c.coupled_second,
                        v.last - c.last,
                    ] {
                        cases = cases.max(d.abs());
                    }
                }
                let ok = (e0 - exact).abs() <= tol && (lb - exact).abs() <= tol && cases <= tol;
                Ok(row![t, e0, exact, lb, cases, ok])
            })?;
            let pass = last_bool(&rows);
            Ok(finish(
                &[
                    "T",
                    "E0",
                    "analytic",
                    "ansatz_bound",
                    "s_block_defect",
                    "holds",
                ],
                rows,
                pass,
                "endpoint-penalized energy 2(1 - cos(pi/(T+2))) reproduced by the sine ansatz"
                    .into(),
            ))
        }
        VerifyCmd::Theorem4 { count, max_t } => {
            if *max_t < 2 || *count == 0 {
                return Err(CliError::Config(
                    "need --count >= 1 and --max-T >= 2".into(),
                ));
            }
            let ks: Vec<usize> = (0..*count).collect();
            let rows = ctx.map(&ks, |&k| {
                let mut rng = ctx.rng(k as u64);
                let t = rng.gen_range(2..=*max_t);
                let h = ensembles::random_tridiagonal(&mut rng, t, (0.0, 0.25), (0.1, 0.35));
                let m = match quantum_to_classical(&h).numerics("markovmap")? {
                    ClassicalMapping::Chain(m) => m,
                    ClassicalMapping::Decoupled(_) => unreachable!("couplings are at least 0.1"),
                };
                let mc = &m.chain;
                let dense = eig_hermitian(&h.to_hermitian(), tol::EIG).numerics("spectral")?;
                let g = dense.ground_state();
                let pi_err = g
                    .vector
                    .iter()
                    .zip(mc.pi())
                    .fold(0.0f64, |e, (z, p)| e.max((z.norm_sqr() - p).abs()));
                // the map shifts the ground energy to 0, so the relation reads gap_P = gap_H
                let gap_rel = (m.gap_p - dense.gap().numerics("spectral")?).abs();
                let cuts = if t <= EXACT_CONDUCTANCE_MAX_T {
                    CutStrategy::Exact
                } else {
                    CutStrategy::Interval
                };
                let cheeger = cheeger_check(mc, cuts).numerics("markovmap")?.holds;
                let bd = birth_death_ell(mc).numerics("markovmap")?.holds;
                let balance = mc.detailed_balance_defect();
                let ok = mc.min_entry() >= -tol
                    && balance <= tol
                    && pi_err <= tol
                    && gap_rel <= tol
                    && cheeger
                    && bd;
                Ok(row![
                    k,
                    t,
                    mc.min_entry(),
                    balance,
                    pi_err,
                    gap_rel,
                    cheeger,
                    bd,
                    ok
                ])
            })?;
            let pass = last_bool(&rows);
            let held = rows
                .iter()
                .filter(|r| matches!(r.last(), Some(Cell::Bool(true))))
                .count();
            Ok(finish(
                &[
                    "k",
                    "T",
                    "min_entry",
                    "balance_defect",
                    "pi_error",
                    "gap_relation",
                    "cheeger",
                    "birth_death",
                    "holds",
                ],
                rows,
                pass,
                format!("mapping checks hold on {held}/{count} random tridiagonals"),
            ))
        }
        VerifyCmd::Theorem5 { t, count } => {
            require_t(t)?;
            if t.contains(&1) {
                return Err(CliError::Config("the weighted clock needs T >= 2".into()));
            }
            let per_t = count.div_ceil(t.len()).max(1);
            let rows = ctx.map(t, |&t| {
                let mut rng = ctx.rng(t as u64);
                let mut random = 0.0f64;
                for _ in 0..per_t {
                    let w = ensembles::random_weights(&mut rng, t).input()?;
                    random = random
                        .max(tridiag_product_bound(&w).numerics("markovmap")?.product * sq(t));
                }
                // the path clock has diagonal 2 inside; halve it to meet |a|, |b| <= 1
                let k = ClockWeights::kitaev(t).input()?;
                let half = ClockWeights::real(
                    k.a().iter().map(|x| x / 2.0).collect(),
                    k.b().iter().map(|x| x.re / 2.0).collect(),
                )
                .input()?;
                let path = tridiag_product_bound(&half).numerics("markovmap")?.product * sq(t);
                let weighted = tridiag_product_bound(&ClockWeights::theorem1(t).input()?)
                    .numerics("markovmap")?
                    .product
                    * sq(t);
                Ok((t, random, path, weighted))
            })?;
            let overall = rows
                .iter()
                .map(|r| r.1.max(r.2).max(r.3))
                .fold(0.0, f64::max);
            let weighted = rows.iter().map(|r| r.3).fold(0.0, f64::max);
            let pass = overall.is_finite() && weighted * 10.0 >= overall;
            let rows = rows
                .into_iter()
                .map(|(t, r, p, w)| row![t, r, p, w])
                .collect();
            Ok(finish(
                &["T", "random_max_T2", "path_T2", "weighted_T2"],
                rows,
                pass,
                format!("ensemble maximum {overall:.6}; weighted clock reaches {weighted:.6}"),
            ))
        }
        VerifyCmd::Theorem6 { count } => {
            let mut instances: Vec<(String, HermitianMatrix)> = Vec::new();
            for t in [10, 20, 50, 100] {
                instances.push((
                    format!("path-clock-{t}"),
                    kitaev_clock(t).input()?.to_hermitian(),
                ));
                instances.push((
                    format!("penalized-clock-{t}"),
                    endpoint_penalized_clock(t).input()?.to_hermitian(),
                ));
                instances.push((
                    format!("weighted-clock-{t}"),
                    theorem1_matrix(t).input()?.to_hermitian(),
                ));
            }
            for k in 0..10u64 {
                let t = [10, 25, 50][k as usize % 3];
                let pi = ensembles::random_distribution(&mut ctx.rng(1000 + k), t).input()?;
                instances.push((
                    format!("metropolis-{k}"),
                    metropolis_hamiltonian(&pi).to_hermitian(),
                ));
            }
            for k in 0..*count as u64 {
                let mut rng = ctx.rng(2000 + k);
                let n = rng.gen_range(6..=40);
                let band = rng.gen_range(1..=3);
                instances.push((
                    format!("banded-{k}"),
                    ensembles::random_banded_hermitian(&mut rng, n, band),
                ));
            }
            let mut rows = ctx.map(&instances, |(name, h)| {
                let r = diameter_bound_check(h).numerics("ulg")?;
                Ok(row![
                    name.as_str(),
                    r.dim,
                    r.diam,
                    r.gap,
                    r.bound,
                    r.slack_factor,
                    r.holds
                ])
            })?;
            let diam_ok = (1..=64).all(|t| {
                kitaev_clock(t)
                    .ok()
                    .and_then(|h| matrix_diameter(&h.to_hermitian(), DEFAULT_ZERO_TOL).ok())
                    .flatten()
                    == Some(t)
            });
            rows.push(row![
                "path-diameter-1..64",
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                diam_ok
            ]);
            let pass = last_bool(&rows);
            Ok(finish(
                &[
                    "instance",
                    "dim",
                    "diam",
                    "gap",
                    "bound",
                    "slack_factor",
                    "holds",
                ],
                rows,
                pass,
                format!("diameter bound checked on {} matrices", instances.len()),
            ))
        }
        VerifyCmd::Kitaev {
            t,
            max_qubits,
            weights: kind,
        } => {
            require_t(t)?;
            if *max_qubits == 0 {
                return Err(CliError::Config("--max-qubits must be at least 1".into()));
            }
            let params: Vec<(usize, usize)> = (1..=*max_qubits)
                .flat_map(|n| t.iter().map(move |&t| (n, t)))
                .collect();
            let rows = ctx.map(&params, |&(n, t)| {
                let c = Circuit::identity(n, t).input()?;
                let p = PenaltyPair::standard(n, &[0], 0).input()?;
                let r = lemma2_sandwich(&weights(*kind, t)?, &c, &p).numerics("circuitham")?;
                let ok = r.holds && r.hypothesis && r.penalty > 0.0;
                Ok(row![
                    n,
                    t,
                    r.penalty,
                    r.penalty * sq(t),
                    r.lower,
                    r.upper,
                    ok
                ])
            })?;
            let lo = rows
                .iter()
                .filter_map(|r| match r[3] {
                    Cell::Float(v) => Some(v),
                    _ => None,
                })
                .fold(f64::INFINITY, f64::min);
            let pass = last_bool(&rows);
            Ok(finish(
                &["n", "T", "penalty", "penalty_T2", "lower", "upper", "holds"],
                rows,
                pass,
                format!("penalty*T^2 >= {lo:.6} on rejecting identity circuits"),
            ))
        }
        VerifyCmd::Lemma1 { count } => {
            let ks: Vec<usize> = (0..*count).collect();
            let rows = ctx.map(&ks, |&k| {
                let mut rng = ctx.rng(k as u64);
                let n = rng.gen_range(1..=3);
                let t = rng.gen_range(1..=8);
                let c = ensembles::random_circuit(&mut rng, n, t).input()?;
                let w = ensembles::random_weights(&mut rng, t).input()?;
                let lhs = h_prop(&w, &c)
                    .numerics("circuitham")?
                    .conjugate_by(&history_unitary(&c).numerics("circuitham")?)
                    .numerics("spectral")?;
                let rhs = clock_tensor_identity(&w, n).numerics("circuitham")?;
                let residual = lhs.sub(&rhs).numerics("spectral")?.as_matrix().max_abs();
                Ok(row![k, n, t, residual, residual <= tol])
            })?;
            let pass = last_bool(&rows);
            Ok(finish(
                &["k", "n", "T", "residual", "holds"],
                rows,
                pass,
                "W^dag H_prop W = H_clock (x) I on random circuits and weights".into(),
            ))
        }
        VerifyCmd::Lemma3 { t, count } => {
            require_t(t)?;
            let mut params: Vec<(String, usize, u64)> = (0..*count)
                .map(|k| ("random".to_string(), t[k % t.len()], k as u64))
                .collect();
            params.extend(
                t.iter()
                    .filter(|&&t| t >= 2)
                    .map(|&t| ("theorem1".to_string(), t, 0)),
            );
            let rows = ctx.map(&params, |(kind, t, k)| {
                let pi = if kind == "random" {
                    ensembles::random_distribution(&mut ctx.rng(*k), *t).input()?
                } else {
                    theorem1_distribution(*t).input()?
                };
                let (e0, amp) = frustration_free(&pi)?;
                Ok(row![kind.as_str(), *t, e0, amp, e0 <= tol && amp <= tol])
            })?;
            let pass = last_bool(&rows);
            Ok(finish(
                &["distribution", "T", "E0", "amplitude_error", "holds"],
                rows,
                pass,
                "Metropolis clocks have zero ground energy and amplitudes sqrt(pi)".into(),
            ))
        }
        VerifyCmd::AppendixA1 { count, t } => {
            if *t == 0 || t % 2 == 1 {
                return Err(CliError::Config("--T must be even and positive".into()));
            }
            let ks: Vec<usize> = (0..*count).collect();
            let rows = ctx.map(&ks, |&k| {
                let n = 1 + k % 3;
                let c = ensembles::random_circuit(&mut ctx.rng(k as u64), n, *t).input()?;
                let ancillas: Vec<usize> = (1..n).collect();
                let p = PenaltyPair::standard(n, &ancillas, 0).input()?;
                let r = padded_construction(&c, &p).numerics("circuitham")?;
                let ok = r.cos2theta <= r.stated_bound + tol;
                Ok(row![
                    k,
                    n,
                    *t,
                    r.eps,
                    r.cos2theta,
                    r.stated_bound,
                    r.exact,
                    ok
                ])
            })?;
            let held = rows
                .iter()
                .filter(|r| matches!(r.last(), Some(Cell::Bool(true))))
                .count();
            let pass = last_bool(&rows);
            Ok(finish(
                &[
                    "k",
                    "n",
                    "T",
                    "eps",
                    "cos2theta",
                    "stated_bound",
                    "exact",
                    "holds",
                ],
                rows,
                pass,
                format!("cos^2(theta) <= (3 + eps)/4 on {held}/{count} circuits"),
            ))
        }
    }
}

//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints one PASS/FAIL line; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use clockforge::adiabatic::{
    final_overlap_estimate, gap_sweep, monotone_excited_check, uniform_grid, Schedule, DEFAULT_GRID,
};
use clockforge::circuitham::{
    acceptance_probability, lemma2_sandwich, padded_construction, padded_unsat_penalty,
    unsat_penalty, Circuit, PenaltyPair,
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
use clockforge::spectral::{eig_hermitian, HermitianMatrix, SymTridiagonal};
use clockforge::ulg::{
    diameter_bound_check, frustrated_pair_analysis, laplacian_equivalence_check,
    low_energy_unsat_upper_bound, matrix_diameter, sigma_x, ulg_hamiltonian, UnitaryLabeledGraph,
    DEFAULT_ZERO_TOL,
};
use rand::Rng;

const SWEEP_T: [usize; 5] = [25, 50, 100, 200, 400];
const CIRCUIT_T: [usize; 3] = [8, 16, 32];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn matrices_equal(a: &SymTridiagonal, b: &SymTridiagonal) -> f64 {
    max_abs_diff(a.diag(), b.diag()).max(max_abs_diff(a.offdiag(), b.offdiag()))
}

/// Checks the Metropolis construction reproduces `sqrt(pi)` with zero energy.
fn frustration_free(pi: &TimeDistribution) -> (f64, f64) {
    let h = metropolis_hamiltonian(pi);
    let g = h.ground_state().expect("ground state");
    let amp = pi.pi().iter().zip(&g.vector).fold(0.0f64, |m, (p, z)| {
        m.max((p.sqrt() - z.re).abs().max(z.im.abs()))
    });
    (g.energy.abs(), amp)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ensembles::rng(1);
    let (mut worst_e, mut worst_amp, mut worst_entry) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..50 {
        let t = SWEEP_T[k % SWEEP_T.len()];
        let pi = ensembles::random_distribution(&mut rng, t).expect("distribution");
        let (e, a) = frustration_free(&pi);
        worst_e = worst_e.max(e);
        worst_amp = worst_amp.max(a);
    }
    for t in SWEEP_T {
        let pi = theorem1_distribution(t).expect("distribution");
        let (e, a) = frustration_free(&pi);
        worst_e = worst_e.max(e);
        worst_amp = worst_amp.max(a);
        let diff = matrices_equal(&theorem1_matrix(t).unwrap(), &metropolis_hamiltonian(&pi));
        worst_entry = worst_entry.max(diff);
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst_e <= 1e-10
            && worst_amp <= 1e-8
            && worst_entry <= 1e-12
            && elapsed < Duration::from_secs(10),
        format!(
            "max |E0| = {worst_e:.2e}, max amplitude error = {worst_amp:.2e}, \
             max entry difference = {worst_entry:.2e}, runtime {elapsed:.2?}"
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let values: Vec<f64> = SWEEP_T
        .iter()
        .map(|&t| theorem1_matrix(t).unwrap().spectral_gap().unwrap() * (t * t) as f64)
        .collect();
    let drift = values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / w[0])
        .fold(0.0, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let listing: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
    Outcome::new(
        lo > 0.0 && drift < 0.1 && elapsed < Duration::from_secs(30),
        format!(
            "gap*T^2 = [{}], bracket [{lo:.4}, {hi:.4}], max drift per doubling {:.2}%, runtime {elapsed:.2?}",
            listing.join(", "),
            100.0 * drift
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut worst_energy = 0.0f64;
    let mut worst_ansatz = 0.0f64;
    for t in [10, 100, 1000] {
        let h = endpoint_penalized_clock(t).unwrap();
        let e = h.kth_eigenvalue(0);
        worst_energy = worst_energy.max((e - endpoint_penalized_energy(t)).abs());
        let lb = stoquastic_lower_bound_tridiagonal(&h, &dirichlet_ansatz(t)).unwrap();
        worst_ansatz = worst_ansatz.max((lb - endpoint_penalized_energy(t)).abs());
    }
    let mut worst_case = 0.0f64;
    for t in [10, 100] {
        for (mu, eta) in [(1.0, 0.0), (0.9, 0.2), (0.75, 0.5), (0.6, 0.8)] {
            let p = SBlockParams::new(t, mu, eta).unwrap();
            let v = s_block_case_values(&p).unwrap();
            let c = s_block_case_closed_forms(&p);
            let d = [
                v.first - c.first,
                v.interior - c.interior,
                v.coupled_first - c.coupled_first,
                v.coupled_second - c.coupled_second,
                v.last - c.last,
            ]
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
            worst_case = worst_case.max(d);
        }
    }
    Outcome::new(
        worst_energy <= 1e-10 && worst_ansatz <= 1e-10 && worst_case <= 1e-10,
        format!(
            "energy vs 2(1-cos(pi/(T+2))) {worst_energy:.2e}, sine-ansatz bound {worst_ansatz:.2e}, \
             five-case closed forms {worst_case:.2e}"
        ),
    )
}

fn rejecting(n: usize, t: usize) -> (Circuit, PenaltyPair) {
    (
        Circuit::identity(n, t).unwrap(),
        PenaltyPair::standard(n, &[0], 0).unwrap(),
    )
}

/// `(min, max)` of `penalty * T^2` and the sandwich verdict.
fn penalty_sweep(weights: impl Fn(usize) -> ClockWeights) -> (f64, f64, bool, usize) {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut all = true;
    let mut count = 0;
    for n in 1..=3 {
        for t in CIRCUIT_T {
            let (c, p) = rejecting(n, t);
            let w = weights(t);
            let r = lemma2_sandwich(&w, &c, &p).unwrap();
            let scaled = r.penalty * (t * t) as f64;
            lo = lo.min(scaled);
            hi = hi.max(scaled);
            all &= r.holds && r.hypothesis;
            count += 1;
        }
    }
    (lo, hi, all, count)
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let (klo, khi, kall, kn) = penalty_sweep(|t| ClockWeights::kitaev(t).unwrap());
    let (tlo, thi, tall, tn) = penalty_sweep(|t| ClockWeights::theorem1(t).unwrap());
    let elapsed = start.elapsed();
    Outcome::new(
        klo > 0.0 && tlo > 0.0 && kall && tall && elapsed < Duration::from_secs(120),
        format!(
            "Kitaev penalty*T^2 in [{klo:.4}, {khi:.4}], weighted penalty*T^2 in [{tlo:.4}, {thi:.4}], \
             sandwich holds on {}/{} instances, runtime {elapsed:.2?}",
            if kall && tall { kn + tn } else { 0 },
            kn + tn
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ensembles::rng(5);
    let (mut min_entry, mut balance, mut pi_err, mut gap_err, mut imag) =
        (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut cheeger_ok, mut bd_ok) = (0, 0);
    let count = 100;
    for _ in 0..count {
        let t = rng.gen_range(2..=200);
        let h = ensembles::random_tridiagonal(&mut rng, t, (0.0, 0.25), (0.1, 0.35));
        let map = match quantum_to_classical(&h).unwrap() {
            ClassicalMapping::Chain(m) => m,
            ClassicalMapping::Decoupled(_) => unreachable!("couplings are bounded away from zero"),
        };
        let mc = &map.chain;
        min_entry = min_entry.min(mc.min_entry());
        balance = balance.max(mc.detailed_balance_defect());
        imag = imag.max(map.max_imaginary);

        // independent dense ground state for pi = |psi|^2
        let dense = eig_hermitian(&h.to_hermitian(), 1e-10).unwrap();
        let g = dense.ground_state();
        let d: Vec<f64> = g.vector.iter().map(|z| z.norm_sqr()).collect();
        pi_err = pi_err.max(max_abs_diff(&d, mc.pi()));
        // the mapped chain has energy 0 after the shift, so (1 - E) = 1
        let e_mapped = map.energy - map.shift;
        gap_err = gap_err.max((map.gap_p - (1.0 - e_mapped) * dense.gap().unwrap()).abs());

        let strategy = if t <= EXACT_CONDUCTANCE_MAX_T {
            CutStrategy::Exact
        } else {
            CutStrategy::Interval
        };
        cheeger_ok += usize::from(cheeger_check(mc, strategy).unwrap().holds);
        bd_ok += usize::from(birth_death_ell(mc).unwrap().holds);
    }
    Outcome::new(
        min_entry >= -1e-10
            && balance <= 1e-9
            && pi_err <= 1e-9
            && gap_err <= 1e-9
            && cheeger_ok == count
            && bd_ok == count,
        format!(
            "min entry {min_entry:.2e}, balance defect {balance:.2e}, |pi - |psi|^2| {pi_err:.2e}, \
             gap relation {gap_err:.2e}, max imaginary part {imag:.2e}, Cheeger {cheeger_ok}/{count}, \
             birth-death {bd_ok}/{count}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ensembles::rng(6);
    let t_values = [25, 50, 100, 200];
    let mut ensemble_max = 0.0f64;
    for k in 0..100 {
        let t = t_values[k % t_values.len()];
        let w = ensembles::random_weights(&mut rng, t).unwrap();
        let r = tridiag_product_bound(&w).unwrap();
        ensemble_max = ensemble_max.max(r.product * (t * t) as f64);
    }
    let mut kitaev_max = 0.0f64;
    let mut weighted_max = 0.0f64;
    for t in t_values {
        // the path clock has diagonal 2, so it enters at half scale to meet |a|, |b| <= 1
        let k = ClockWeights::kitaev(t).unwrap();
        let half = ClockWeights::real(
            k.a().iter().map(|x| x / 2.0).collect(),
            k.b().iter().map(|x| x.re / 2.0).collect(),
        )
        .unwrap();
        kitaev_max = kitaev_max.max(tridiag_product_bound(&half).unwrap().product * (t * t) as f64);
        let w = ClockWeights::theorem1(t).unwrap();
        weighted_max =
            weighted_max.max(tridiag_product_bound(&w).unwrap().product * (t * t) as f64);
    }
    let overall = ensemble_max.max(kitaev_max).max(weighted_max);
    Outcome::new(
        overall.is_finite() && weighted_max * 10.0 >= overall,
        format!(
            "max gap*min(endpoint)*T^2: random {ensemble_max:.3e}, path clock {kitaev_max:.4}, \
             weighted clock {weighted_max:.4}; weighted within factor {:.2} of the maximum",
            overall / weighted_max
        ),
    )
}

fn criterion_7() -> Outcome {
    let grid = uniform_grid(DEFAULT_GRID);
    let mut floor = f64::INFINITY;
    let mut monotone = true;
    let mut edge_min = true;
    let mut notes = Vec::new();
    for t in [10, 20, 40] {
        let modified = Schedule::clock_modified(t).unwrap();
        let c = gap_sweep(&modified, &grid).unwrap();
        let grid_min = c.points.iter().map(|p| p.gap).fold(f64::INFINITY, f64::min);
        floor = floor.min(grid_min);
        monotone &= monotone_excited_check(&modified, &grid).unwrap().monotone;
        // the minimum reaches s = 1 only asymptotically; small T is reported, not asserted
        for (name, sch) in [
            ("path", Schedule::clock_standard(t).unwrap()),
            ("weighted", Schedule::clock_weighted(t).unwrap()),
        ] {
            let c = gap_sweep(&sch, &grid).unwrap();
            notes.push(format!("{name} T={t} argmin {:.4}", c.argmin));
        }
    }
    let t = 100;
    let mut endpoint_ok = true;
    let pi_modified = final_overlap_estimate(&Schedule::clock_modified(t).unwrap())
        .unwrap()
        .endpoint_weight;
    let g = kitaev_clock(t).unwrap().ground_state().unwrap();
    let pi_standard = g.vector[t].norm_sqr();
    endpoint_ok &=
        (pi_modified - 0.25).abs() < 1e-9 && (pi_standard - 1.0 / (t + 1) as f64).abs() < 1e-9;
    for sch in [
        Schedule::clock_standard(t).unwrap(),
        Schedule::clock_weighted(t).unwrap(),
    ] {
        let c = gap_sweep(&sch, &grid).unwrap();
        edge_min &=
            c.grid_argmin == grid.len() - 1 && c.argmin >= 1.0 - 1.0 / (grid.len() - 1) as f64;
    }
    Outcome::new(
        floor >= 0.25 - 1e-9 && monotone && edge_min && endpoint_ok,
        format!(
            "modified min gap {floor:.4}, E1 non-decreasing: {monotone}, linear sweeps minimal at s = 1 for T={t}: \
             {edge_min} (smaller T: {}), pi_T = {pi_modified:.4} (weighted) vs {pi_standard:.5} = 1/{} (path)",
            notes.join(", "),
            t + 1
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ensembles::rng(8);
    let mut instances: Vec<(String, HermitianMatrix)> = Vec::new();
    for t in [10, 20, 50, 100] {
        instances.push((
            format!("path clock T={t}"),
            kitaev_clock(t).unwrap().to_hermitian(),
        ));
        instances.push((
            format!("penalized clock T={t}"),
            endpoint_penalized_clock(t).unwrap().to_hermitian(),
        ));
        instances.push((
            format!("weighted clock T={t}"),
            theorem1_matrix(t).unwrap().to_hermitian(),
        ));
    }
    for k in 0..10 {
        let t = [10, 25, 50][k % 3];
        let pi = ensembles::random_distribution(&mut rng, t).unwrap();
        instances.push((
            format!("Metropolis #{k} T={t}"),
            metropolis_hamiltonian(&pi).to_hermitian(),
        ));
    }
    for k in 0..50 {
        let n = rng.gen_range(6..=40);
        let band = rng.gen_range(1..=3);
        instances.push((
            format!("banded #{k} n={n} w={band}"),
            ensembles::random_banded_hermitian(&mut rng, n, band),
        ));
    }
    let mut failures = Vec::new();
    let mut near = Vec::new();
    for (name, h) in &instances {
        let r = diameter_bound_check(h).unwrap();
        if !r.holds {
            failures.push(format!("{name}: gap {:.4} > bound {:.4}", r.gap, r.bound));
        } else if r.slack_factor < 1.5 {
            near.push(format!("{name} ({:.3})", r.slack_factor));
        }
    }
    let diam_ok = (1..=64).all(|t| {
        matrix_diameter(&kitaev_clock(t).unwrap().to_hermitian(), DEFAULT_ZERO_TOL).unwrap()
            == Some(t)
    });
    let mut detail = format!(
        "bound holds on {}/{} instances, path diameter = T for T <= 64: {diam_ok}",
        instances.len() - failures.len(),
        instances.len()
    );
    if !near.is_empty() {
        detail.push_str(&format!(
            "; near saturation (bound/gap < 1.5): {}",
            near.join(", ")
        ));
    }
    if !failures.is_empty() {
        detail.push_str(&format!("; violations: {}", failures.join(", ")));
    }
    Outcome::new(failures.is_empty() && diam_ok, detail)
}

fn criterion_9() -> Outcome {
    let mut rng = ensembles::rng(9);
    let (mut residual, mut spectrum) = (0.0f64, 0.0f64);
    for k in 0..20 {
        let v = 2 + k % 7;
        let extra = rng.gen_range(0..=3);
        let g = ensembles::random_simple_ulg(&mut rng, v, extra).unwrap();
        let r = laplacian_equivalence_check(&g).unwrap();
        residual = residual.max(r.residual);
        spectrum = spectrum.max(r.spectrum_residual);
    }

    let g = UnitaryLabeledGraph::double_edge(&sigma_x()).unwrap();
    let printed_h = HermitianMatrix::from_real_rows(&[
        &[2.0, 0.0, -1.0, -1.0],
        &[0.0, 2.0, -1.0, -1.0],
        &[-1.0, -1.0, 2.0, 0.0],
        &[-1.0, -1.0, 0.0, 2.0],
    ])
    .unwrap();
    let printed_t = HermitianMatrix::from_real_rows(&[
        &[2.0, 0.0, -2.0, 0.0],
        &[0.0, 2.0, 0.0, 0.0],
        &[-2.0, 0.0, 2.0, 0.0],
        &[0.0, 0.0, 0.0, 2.0],
    ])
    .unwrap();
    let h_exact = ulg_hamiltonian(&g) == printed_h;
    let f = frustrated_pair_analysis(&sigma_x()).unwrap();
    let t_err = f.transformed.sub(&printed_t).unwrap().as_matrix().max_abs();

    let mut certified = true;
    for t in CIRCUIT_T {
        let clock = kitaev_clock(t).unwrap();
        let e1 = clock.kth_eigenvalue(1);
        let r = low_energy_unsat_upper_bound(&clock.to_hermitian(), &[t], e1).unwrap();
        let mut diag = clock.diag().to_vec();
        diag[t] += 1.0;
        let fk = SymTridiagonal::new(diag, clock.offdiag().to_vec()).unwrap();
        certified &= r.energy <= e1 + 1e-12
            && fk.kth_eigenvalue(0) <= r.energy + 1e-12
            && r.max_penalty_amplitude < 1e-10;
    }
    Outcome::new(
        residual < 1e-9 && spectrum < 1e-9 && h_exact && t_err < 1e-12 && certified,
        format!(
            "equivalence residual {residual:.2e}, spectrum residual {spectrum:.2e}, H_G exact: {h_exact}, \
             transformed matrix error {t_err:.1e}, E(H_FK) <= E1(clock) certified: {certified}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ensembles::rng(10);
    let mut violations = 0;
    let mut worst_excess = 0.0f64;
    let mut layout_err = 0.0f64;
    let count = 20;
    for k in 0..count {
        let n = 1 + k % 3;
        let t = [4, 8][k % 2];
        let c = ensembles::random_circuit(&mut rng, n, t).unwrap();
        let ancillas: Vec<usize> = (1..n).collect();
        let p = PenaltyPair::standard(n, &ancillas, 0).unwrap();
        let r = padded_construction(&c, &p).unwrap();
        if !r.stated_bound_holds {
            violations += 1;
            worst_excess = worst_excess.max(r.cos2theta - r.stated_bound);
        }
        layout_err = layout_err.max((r.cos2theta - r.exact).abs());
        debug_assert!((acceptance_probability(&c, &p).unwrap().eps - r.eps).abs() < 1e-12);
    }

    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for n in 1..=3 {
        for t in CIRCUIT_T {
            let (c, p) = rejecting(n, t);
            let scaled = padded_unsat_penalty(&c, &p).unwrap() * (t * t) as f64;
            lo = lo.min(scaled);
            hi = hi.max(scaled);
        }
    }
    // same family through the unpadded Kitaev construction, for comparison
    let (c, p) = rejecting(1, 8);
    let reference = unsat_penalty(&ClockWeights::kitaev(8).unwrap(), &c, &p).unwrap() * 64.0;
    Outcome::new(
        violations == 0 && lo > 0.0,
        format!(
            "cos^2(theta) <= (3+eps)/4 on {}/{count} circuits (worst excess {worst_excess:.4}); \
             cos^2(theta) matches (3T/2 + (T/2+1)sqrt(eps))/(2T+1) within {layout_err:.1e}; \
             padded penalty*T^2 in [{lo:.4}, {hi:.4}] (unpadded T=8: {reference:.4})",
            count - violations
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "weighted clocks are frustration free with amplitudes sqrt(pi)",
            criterion_1,
        ),
        ("weighted clock gap scales as T^-2", criterion_2),
        (
            "endpoint-penalized clock energy and S-block case values",
            criterion_3,
        ),
        (
            "UNSAT penalty of rejecting circuits and the geometric sandwich",
            criterion_4,
        ),
        (
            "quantum-to-classical mapping on random tridiagonals",
            criterion_5,
        ),
        ("gap times endpoint weight saturation", criterion_6),
        ("adiabatic schedules", criterion_7),
        ("diameter bound", criterion_8),
        ("unitary labeled graphs", criterion_9),
        ("padded construction", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {:>2} ({name}): {} [{:.2?}]",
            i + 1,
            o.detail,
            start.elapsed()
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use clockforge::clockham::{metropolis_chain, metropolis_hamiltonian};
use clockforge::ensembles;
use clockforge::markovmap::{
    birth_death_ell, cheeger_check, quantum_to_classical, ClassicalMapping, CutStrategy,
    MarkovChain,
};
use clockforge::{HermitianTridiagonal, C64};
use serde::{Deserialize, Serialize};

use super::{distribution, read_json, Ctx};
use crate::config::{ChainSource, Cuts, MarkovCmd};
use crate::error::{CliError, Context};
use crate::output::Outcome;

#[derive(Deserialize)]
struct TridiagFile {
    diag: Vec<f64>,
    lower: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct Site {
    t: usize,
    psi: [f64; 2],
    pi: f64,
    down: f64,
    stay: f64,
    up: f64,
}

#[derive(Serialize)]
struct MapReport {
    energy: f64,
    shift: f64,
    gap_h: f64,
    gap_p: f64,
    min_entry: f64,
    stochasticity_defect: f64,
    detailed_balance_defect: f64,
    max_imaginary: f64,
    sites: Vec<Site>,
}

fn need_t(src: &ChainSource) -> Result<usize, CliError> {
    match src.t {
        Some(t) if t >= 1 => Ok(t),
        _ => Err(CliError::Config(
            "--T (at least 1) is required with --pi or --random".into(),
        )),
    }
}

fn tridiagonal(src: &ChainSource, ctx: &Ctx) -> Result<HermitianTridiagonal, CliError> {
    if let Some(path) = &src.file {
        let f: TridiagFile = read_json(path)?;
        let lower = f.lower.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        return HermitianTridiagonal::new(f.diag, lower).input();
    }
    let t = need_t(src)?;
    if src.random {
        return Ok(ensembles::random_tridiagonal(
            &mut ctx.rng(t as u64),
            t,
            (0.0, 0.25),
            (0.1, 0.35),
        ));
    }
    let Some(kind) = src.pi else {
        return Err(CliError::Config(
            "give one of --file, --pi or --random".into(),
        ));
    };
    let h = metropolis_hamiltonian(&distribution(kind, t, ctx)?);
    let lower = h.offdiag().iter().map(|&b| C64::new(b, 0.0)).collect();
    HermitianTridiagonal::new(h.diag().to_vec(), lower).input()
}

fn chain(src: &ChainSource, ctx: &Ctx) -> Result<MarkovChain, CliError> {
    if let (None, false, Some(kind)) = (&src.file, src.random, src.pi) {
        return Ok(metropolis_chain(&distribution(kind, need_t(src)?, ctx)?));
    }
    match quantum_to_classical(&tridiagonal(src, ctx)?).numerics("markovmap")? {
        ClassicalMapping::Chain(m) => Ok(m.chain),
        ClassicalMapping::Decoupled(d) => Err(CliError::Config(format!(
            "coupling b_{} vanishes; the Hamiltonian decouples and has no chain",
            d.cut
        ))),
    }
}

pub fn run(cmd: &MarkovCmd, ctx: &Ctx) -> Result<Outcome, CliError> {
    match cmd {
        MarkovCmd::Map { source } => {
            match quantum_to_classical(&tridiagonal(source, ctx)?).numerics("markovmap")? {
                ClassicalMapping::Chain(m) => {
                    let mc = &m.chain;
                    let n = mc.states();
                    let sites = (0..n)
                        .map(|t| Site {
                            t,
                            psi: [m.psi[t].re, m.psi[t].im],
                            pi: mc.pi()[t],
                            down: if t > 0 { mc.p(t, t - 1) } else { 0.0 },
                            stay: mc.p(t, t),
                            up: if t + 1 < n { mc.p(t, t + 1) } else { 0.0 },
                        })
                        .collect();
                    Outcome::report(MapReport {
                        energy: m.energy,
                        shift: m.shift,
                        gap_h: m.gap_h,
                        gap_p: m.gap_p,
                        min_entry: mc.min_entry(),
                        stochasticity_defect: mc.stochasticity_defect(),
                        detailed_balance_defect: mc.detailed_balance_defect(),
                        max_imaginary: m.max_imaginary,
                        sites,
                    })
                }
                ClassicalMapping::Decoupled(d) => Outcome::report(serde_json::json!({
                    "decoupled": true,
                    "cut": d.cut,
                    "energy": d.energy,
                    "gap_h": d.gap_h,
                    "excitation": d.excitation.map(|v| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()),
                })),
            }
        }
        MarkovCmd::Cheeger { source, cuts } => {
            let mc = chain(source, ctx)?;
            let strategy = match cuts {
                Cuts::Interval => CutStrategy::Interval,
                Cuts::Exact => CutStrategy::Exact,
            };
            let r = match cheeger_check(&mc, strategy) {
                Err(e @ clockforge::Error::CapExceeded { .. }) => {
                    return Err(CliError::Config(e.to_string()))
                }
                other => other.numerics("markovmap")?,
            };
            Outcome::report(r)
        }
        MarkovCmd::Bd { source } => {
            Outcome::report(birth_death_ell(&chain(source, ctx)?).numerics("markovmap")?)
        }
    }
}

use clockforge::circuitham::{
    acceptance_probability, lemma2_sandwich, padded_construction, padded_unsat_penalty, Circuit,
    PenaltyPair, PenaltySpec,
};
use clockforge::clockham::ClockWeights;
use serde::Deserialize;

use super::{read_json, require_t, Ctx};
use crate::config::{CircuitCmd, CircuitSource, WeightKind};
use crate::error::{CliError, Context};
use crate::output::{Outcome, Table};
use crate::row;

#[derive(Deserialize)]
struct CircuitFile {
    circuit: Circuit,
    penalty: PenaltySpec,
}

/// One `(circuit, penalties)` instance per requested `T`, or the single file instance.
pub fn instances(src: &CircuitSource) -> Result<Vec<(Circuit, PenaltyPair)>, CliError> {
    match (&src.file, src.identity) {
        (Some(path), None) => {
            if !src.t.is_empty() {
                return Err(CliError::Config(
                    "--T applies to --identity circuits only".into(),
                ));
            }
            let f: CircuitFile = read_json(path)?;
            let p = f.penalty.to_pair(f.circuit.n()).input()?;
            Ok(vec![(f.circuit, p)])
        }
        (None, Some(n)) => {
            require_t(&src.t)?;
            src.t
                .iter()
                .map(|&t| {
                    let c = Circuit::identity(n, t).input()?;
                    let p = PenaltyPair::standard(n, &src.ancillas, src.output).input()?;
                    Ok((c, p))
                })
                .collect()
        }
        _ => Err(CliError::Config(
            "give exactly one of --file or --identity".into(),
        )),
    }
}

pub fn weights(kind: WeightKind, t: usize) -> Result<ClockWeights, CliError> {
    match kind {
        WeightKind::Kitaev => ClockWeights::kitaev(t).input(),
        WeightKind::Theorem1 => ClockWeights::theorem1(t).input(),
    }
}

pub fn run(cmd: &CircuitCmd, ctx: &Ctx) -> Result<Outcome, CliError> {
    match cmd {
        CircuitCmd::Unsat {
            source,
            weights: kind,
        } => {
            let inst = instances(source)?;
            let rows = ctx.map(&inst, |(c, p)| {
                let t = c.t();
                let r = lemma2_sandwich(&weights(*kind, t)?, c, p).numerics("circuitham")?;
                Ok(row![
                    c.n(),
                    t,
                    r.eps,
                    r.penalty,
                    r.penalty * (t * t) as f64,
                    r.lower,
                    r.upper,
                    r.clock_gap,
                    r.hypothesis,
                    r.holds
                ])
            })?;
            let mut table = Table::new(&[
                "n",
                "T",
                "eps",
                "penalty",
                "penalty_T2",
                "lower",
                "upper",
                "clock_gap",
                "hypothesis",
                "holds",
            ]);
            rows.into_iter().for_each(|r| table.push(r));
            Ok(Outcome::table(table))
        }
        CircuitCmd::Accept { source } => {
            let inst = instances(source)?;
            if source.file.is_some() {
                let (c, p) = &inst[0];
                return Outcome::report(acceptance_probability(c, p).numerics("circuitham")?);
            }
            let rows = ctx.map(&inst, |(c, p)| {
                let a = acceptance_probability(c, p).numerics("circuitham")?;
                Ok(row![c.n(), c.t(), a.eps, a.trivial_kernel])
            })?;
            let mut table = Table::new(&["n", "T", "eps", "trivial_kernel"]);
            rows.into_iter().for_each(|r| table.push(r));
            Ok(Outcome::table(table))
        }
        CircuitCmd::Padded { source } => {
            let inst = instances(source)?;
            let rows = ctx.map(&inst, |(c, p)| {
                let r = padded_construction(c, p).numerics("circuitham")?;
                let pen = padded_unsat_penalty(c, p).numerics("circuitham")?;
                let t = c.t();
                Ok(row![
                    c.n(),
                    t,
                    r.eps,
                    r.cos2theta,
                    r.stated_bound,
                    r.exact,
                    r.stated_bound_holds,
                    pen,
                    pen * (t * t) as f64
                ])
            })?;
            let mut table = Table::new(&[
                "n",
                "T",
                "eps",
                "cos2theta",
                "stated_bound",
                "exact",
                "stated_bound_holds",
                "penalty",
                "penalty_T2",
            ]);
            rows.into_iter().for_each(|r| table.push(r));
            Ok(Outcome::table(table))
        }
    }
}

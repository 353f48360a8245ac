use clockforge::circuitham::Gate;
use clockforge::clockham::kitaev_clock;
use clockforge::ulg::{
    diameter_bound_check, frustrated_pair_analysis, is_simple, laplacian_equivalence_check,
    ulg_hamiltonian, UnitaryLabeledGraph,
};
use clockforge::{CMatrix, HermitianMatrix};

use super::{read_json, Ctx};
use crate::config::{GraphSource, UlgCmd};
use crate::error::{CliError, Context};
use crate::output::Outcome;

fn single_qubit(name: &str) -> Result<CMatrix, CliError> {
    let g = Gate::named(name, vec![0]).input()?;
    if g.unitary().rows() != 2 {
        return Err(CliError::Config(format!(
            "{name} is not a single-qubit gate"
        )));
    }
    Ok(g.unitary().clone())
}

fn graph(src: &GraphSource) -> Result<Option<UnitaryLabeledGraph>, CliError> {
    match (&src.file, &src.double_edge, src.path) {
        (Some(path), None, None) => Ok(Some(read_json(path)?)),
        (None, Some(name), None) => Ok(Some(
            UnitaryLabeledGraph::double_edge(&single_qubit(name)?).input()?,
        )),
        (None, None, Some(len)) => {
            if len == 0 {
                return Err(CliError::Config("--path needs at least one edge".into()));
            }
            Ok(Some(
                UnitaryLabeledGraph::path(vec![CMatrix::identity(2); len]).input()?,
            ))
        }
        (None, None, None) => Ok(None),
        _ => Err(CliError::Config(
            "give only one of --file, --double-edge or --path".into(),
        )),
    }
}

fn require_graph(src: &GraphSource) -> Result<UnitaryLabeledGraph, CliError> {
    graph(src)?
        .ok_or_else(|| CliError::Config("give one of --file, --double-edge or --path".into()))
}

pub fn run(cmd: &UlgCmd, _ctx: &Ctx) -> Result<Outcome, CliError> {
    match cmd {
        UlgCmd::Build { source } => {
            let g = require_graph(source)?;
            let h = ulg_hamiltonian(&g);
            Outcome::report(serde_json::json!({ "dim": h.dim(), "graph": g, "hamiltonian": h }))
        }
        UlgCmd::Check { source } => {
            let g = require_graph(source)?;
            let s = is_simple(&g);
            let eq = if s.simple {
                Some(laplacian_equivalence_check(&g).numerics("ulg")?)
            } else {
                None
            };
            Outcome::report(serde_json::json!({
                "simple": s.simple,
                "witness": s.witness,
                "max_defect": s.max_defect,
                "residual": eq.as_ref().map(|e| e.residual),
                "spectrum_residual": eq.as_ref().map(|e| e.spectrum_residual),
            }))
        }
        UlgCmd::Diam {
            source,
            clock_t,
            matrix,
        } => {
            let h: HermitianMatrix = match (graph(source)?, clock_t, matrix) {
                (Some(g), None, None) => ulg_hamiltonian(&g),
                (None, Some(t), None) => kitaev_clock(*t).input()?.to_hermitian(),
                (None, None, Some(path)) => read_json(path)?,
                _ => {
                    return Err(CliError::Config(
                        "give exactly one of a graph source, --clock-T or --matrix".into(),
                    ))
                }
            };
            let r = match diameter_bound_check(&h) {
                Err(e @ clockforge::Error::Precondition(_)) => {
                    return Err(CliError::Config(e.to_string()))
                }
                other => other.numerics("ulg")?,
            };
            Outcome::report(r)
        }
        UlgCmd::Frustrated { gate } => {
            Outcome::report(frustrated_pair_analysis(&single_qubit(gate)?).numerics("ulg")?)
        }
    }
}

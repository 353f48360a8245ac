use std::path::Path;

use clockforge::clockham::{theorem1_distribution, TimeDistribution};
use clockforge::ensembles;
use rand::Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;

use crate::config::{Command, PiKind};
use crate::error::{CliError, Context};
use crate::output::Outcome;

pub mod adiabatic;
pub mod circuit;
pub mod clock;
pub mod markov;
pub mod ulg;
pub mod verify;

pub struct Ctx {
    pub seed: u64,
    pub tol: f64,
    pool: rayon::ThreadPool,
}

impl Ctx {
    pub fn new(seed: u64, tol: f64, jobs: usize) -> Result<Self, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
        Ok(Ctx { seed, tol, pool })
    }

    /// Applies `f` to every parameter, possibly in parallel; results keep
    /// parameter order.
    pub fn map<P, R, F>(&self, params: &[P], f: F) -> Result<Vec<R>, CliError>
    where
        P: Sync,
        R: Send,
        F: Fn(&P) -> Result<R, CliError> + Sync + Send,
    {
        self.pool.install(|| params.par_iter().map(f).collect())
    }

    /// Independent seeded stream per work item, so parallel runs reproduce serial ones.
    pub fn rng(&self, stream: u64) -> impl Rng {
        ensembles::rng(self.seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

pub fn run(cmd: &Command, ctx: &Ctx) -> Result<Outcome, CliError> {
    match cmd {
        Command::Clock(c) => clock::run(c, ctx),
        Command::Circuit(c) => circuit::run(c, ctx),
        Command::Markov(c) => markov::run(c, ctx),
        Command::Adiabatic(c) => adiabatic::run(c, ctx),
        Command::Ulg(c) => ulg::run(c, ctx),
        Command::Verify(c) => verify::run(c, ctx),
    }
}

pub fn distribution(kind: PiKind, t: usize, ctx: &Ctx) -> Result<TimeDistribution, CliError> {
    match kind {
        PiKind::Uniform => TimeDistribution::uniform(t).input(),
        PiKind::Theorem1 => theorem1_distribution(t).input(),
        PiKind::Random => ensembles::random_distribution(&mut ctx.rng(t as u64), t).input(),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("bad input {}: {e}", path.display())))
}

pub fn require_t(t: &[usize]) -> Result<(), CliError> {
    if t.is_empty() {
        return Err(CliError::Config("at least one --T value is needed".into()));
    }
    if t.contains(&0) {
        return Err(CliError::Config("T must be at least 1".into()));
    }
    Ok(())
}

/// `|x - y| / |x|`, for drift between consecutive sweep values.
pub fn relative_change(x: f64, y: f64) -> f64 {
    (y - x).abs() / x.abs()
}

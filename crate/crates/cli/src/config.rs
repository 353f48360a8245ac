//! Experiment configuration: the clap command tree doubles as the serialized
//! config, so `--print-config` output can be replayed with `--config`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const TOL_ENV: &str = "CLOCKFORGE_TOL";

#[derive(Parser, Debug)]
#[command(
    name = "clockforge",
    version,
    about = "Clock Hamiltonian experiments and claim checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Load the whole experiment from a JSON config instead of the command line.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output format; sweeps default to csv, single reports to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Tolerance for claim checks; overrides CLOCKFORGE_TOL.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Worker threads for sweeps. Results keep parameter order.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    /// Print the resolved config as JSON and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Everything that determines an artifact's content.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl ExperimentConfig {
    pub fn resolve(cli: Cli) -> Result<(Self, usize, bool), CliError> {
        let env_tol = match std::env::var(TOL_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("{TOL_ENV}={s:?} is not a number")))?,
            ),
            Err(_) => None,
        };
        let mut cfg = match (&cli.config, cli.command) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either --config or a subcommand, not both".into(),
                ));
            }
            (None, None) => {
                return Err(CliError::Config("no subcommand given (try --help)".into()))
            }
            (Some(path), None) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                serde_json::from_str::<ExperimentConfig>(&text)
                    .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?
            }
            (None, Some(command)) => ExperimentConfig {
                command,
                seed: 0,
                tol: env_tol.unwrap_or(DEFAULT_TOL),
                format: None,
                out: None,
            },
        };
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(t) = cli
            .tol
            .or(if cli.config.is_some() { None } else { env_tol })
        {
            cfg.tol = t;
        }
        if cli.format.is_some() {
            cfg.format = cli.format;
        }
        if cli.out.is_some() {
            cfg.out = cli.out;
        }
        if !(cfg.tol.is_finite() && cfg.tol > 0.0) {
            return Err(CliError::Config(format!(
                "tolerance must be positive, got {}",
                cfg.tol
            )));
        }
        if cli.jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        Ok((cfg, cli.jobs, cli.print_config))
    }

    /// SHA-256 over the parameters that shape the output (not the output path).
    pub fn hash(&self) -> String {
        let key = serde_json::json!({
            "command": self.command,
            "seed": self.seed,
            "tol": self.tol,
            "format": self.format,
        });
        hex::encode(Sha256::digest(key.to_string().as_bytes()))
    }
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Clock-register Hamiltonians.
    #[command(subcommand)]
    Clock(ClockCmd),
    /// Full circuit Hamiltonians and UNSAT penalties.
    #[command(subcommand)]
    Circuit(CircuitCmd),
    /// Markov chains from tridiagonal Hamiltonians.
    #[command(subcommand)]
    Markov(MarkovCmd),
    /// Adiabatic interpolation schedules.
    #[command(subcommand)]
    Adiabatic(AdiabaticCmd),
    /// Unitary labeled graphs.
    #[command(subcommand)]
    Ulg(UlgCmd),
    /// Numerical checks of the construction's claims; exit 4 on failure.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockKind {
    /// Uniform path clock, diagonal 1 at the ends and 2 inside.
    Kitaev,
    /// The weighted clock with endpoint weight 1/4.
    Theorem1,
    /// Path clock plus penalties on both endpoints.
    Penalized,
    /// Metropolis clock for `--pi`.
    Metropolis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PiKind {
    Uniform,
    Theorem1,
    /// Weights uniform in [0.05, 1], seeded.
    Random,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClockCmd {
    /// Per-site coefficients and ground amplitudes of one clock.
    Build {
        #[arg(long, value_enum, default_value = "theorem1")]
        kind: ClockKind,
        #[arg(long, value_enum, default_value = "uniform")]
        pi: PiKind,
        #[arg(long = "T")]
        t: usize,
    },
    /// Ground energy and gap of Metropolis clocks over a range of T.
    Metropolis {
        #[arg(long, value_enum, default_value = "uniform")]
        pi: PiKind,
        #[arg(long = "T", value_delimiter = ',', required = true)]
        t: Vec<usize>,
    },
    /// Endpoint-penalized clock energy against the sine-ansatz lower bound.
    Bound {
        #[arg(long = "T", value_delimiter = ',', required = true)]
        t: Vec<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Kitaev,
    Theorem1,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct CircuitSource {
    /// JSON file `{"circuit": {"n", "gates"}, "penalty": {"ancillas", "output"}}`.
    #[arg(long, conflicts_with = "identity")]
    pub file: Option<PathBuf>,
    /// Identity circuit on this many qubits, one run per `--T`.
    #[arg(long)]
    pub identity: Option<usize>,
    #[arg(long = "T", value_delimiter = ',')]
    #[serde(default)]
    pub t: Vec<usize>,
    /// Ancilla qubits checked by the input penalty (identity circuits).
    #[arg(long, value_delimiter = ',', default_value = "0")]
    #[serde(default)]
    pub ancillas: Vec<usize>,
    /// Output qubit (identity circuits).
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub output: usize,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitCmd {
    /// UNSAT penalty with the geometric lower and endpoint upper bounds.
    Unsat {
        #[command(flatten)]
        source: CircuitSource,
        #[arg(long, value_enum, default_value = "kitaev")]
        weights: WeightKind,
    },
    /// Maximum acceptance probability.
    Accept {
        #[command(flatten)]
        source: CircuitSource,
    },
    /// Padded construction: angle between ground space and penalty kernel.
    Padded {
        #[command(flatten)]
        source: CircuitSource,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cuts {
    Interval,
    Exact,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ChainSource {
    /// JSON tridiagonal `{"diag": [..], "lower": [[re, im], ..]}`.
    #[arg(long, conflicts_with_all = ["pi", "random"])]
    pub file: Option<PathBuf>,
    /// Metropolis chain of this distribution.
    #[arg(long, value_enum, conflicts_with = "random")]
    pub pi: Option<PiKind>,
    /// Seeded random complex tridiagonal (diagonal in [0, 0.25], couplings in [0.1, 0.35]).
    #[arg(long)]
    #[serde(default)]
    pub random: bool,
    #[arg(long = "T")]
    pub t: Option<usize>,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkovCmd {
    /// Quantum-to-classical map of a tridiagonal Hamiltonian.
    Map {
        #[command(flatten)]
        source: ChainSource,
    },
    /// Conductance and the Cheeger sandwich.
    Cheeger {
        #[command(flatten)]
        source: ChainSource,
        #[arg(long, value_enum, default_value = "interval")]
        cuts: Cuts,
    },
    /// Birth-death gap characterization.
    Bd {
        #[command(flatten)]
        source: ChainSource,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleChoice {
    /// Linear schedule ending at the path clock scaled by 1/4.
    Standard,
    /// Linear schedule ending at the weighted clock.
    Weighted,
    /// Weighted clock switched on with amplitude T^4.
    Modified,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdiabaticCmd {
    /// Gap along the schedule.
    Sweep {
        #[arg(long, value_enum, default_value = "modified")]
        schedule: ScheduleChoice,
        #[arg(long = "T")]
        t: usize,
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Final-state overlap of the modified schedule.
    Overlap {
        #[arg(long = "T", value_delimiter = ',', required = true)]
        t: Vec<usize>,
    },
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct GraphSource {
    /// JSON graph `{"vertices", "edges", "d", "vertex_weights"?}`.
    #[arg(long, conflicts_with_all = ["double_edge", "path"])]
    pub file: Option<PathBuf>,
    /// Two vertices joined by edges labeled I and this single-qubit gate.
    #[arg(long)]
    pub double_edge: Option<String>,
    /// Path of this many edges labeled by the identity (d = 2).
    #[arg(long, conflicts_with = "double_edge")]
    pub path: Option<usize>,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UlgCmd {
    /// The graph and its Hamiltonian.
    Build {
        #[command(flatten)]
        source: GraphSource,
    },
    /// Simplicity verdict and Laplacian-equivalence residual.
    Check {
        #[command(flatten)]
        source: GraphSource,
    },
    /// Matrix diameter and the gap bound it implies.
    Diam {
        #[command(flatten)]
        source: GraphSource,
        /// Use the path clock on T+1 sites instead of a graph.
        #[arg(long = "clock-T", conflicts_with_all = ["file", "double_edge", "path", "matrix"])]
        clock_t: Option<usize>,
        /// Hermitian matrix JSON `{"dim", "entries": [[re, im], ..]}`.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Two vertices with labels I and U: spectrum of the frustrated pair.
    Frustrated {
        /// Built-in single-qubit gate name.
        #[arg(long, default_value = "X")]
        gate: String,
    },
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyCmd {
    /// Weighted clock: frustration free and gap of order T^-2.
    Theorem1 {
        #[arg(long = "T", value_delimiter = ',', default_value = "25,50,100,200,400")]
        t: Vec<usize>,
    },
    /// Modified adiabatic schedule keeps a constant gap with pi_T = 1/4.
    Theorem2 {
        #[arg(long = "T", value_delimiter = ',', default_value = "10,20,40")]
        t: Vec<usize>,
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Endpoint-penalized clock energy and the S-block case bounds.
    Theorem3 {
        #[arg(long = "T", value_delimiter = ',', default_value = "10,100")]
        t: Vec<usize>,
    },
    /// Quantum-to-classical map on random complex tridiagonals.
    Theorem4 {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long = "max-T", default_value_t = 200)]
        max_t: usize,
    },
    /// Gap times endpoint weight is O(T^-2) and the weighted clock saturates it.
    Theorem5 {
        #[arg(long = "T", value_delimiter = ',', default_value = "25,50,100,200")]
        t: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Diameter bound on the gap of Hermitian matrices.
    Theorem6 {
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// UNSAT penalty of rejecting circuits and the geometric sandwich.
    Kitaev {
        #[arg(long = "T", value_delimiter = ',', default_value = "8,16,32")]
        t: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        max_qubits: usize,
        #[arg(long, value_enum, default_value = "kitaev")]
        weights: WeightKind,
    },
    /// History unitary conjugates the propagation term to clock (x) I.
    Lemma1 {
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Metropolis clocks are frustration free with amplitudes sqrt(pi).
    Lemma3 {
        #[arg(long = "T", value_delimiter = ',', default_value = "25,50,100,200,400")]
        t: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    /// Padded construction angle bound cos^2 <= (3 + eps)/4.
    #[command(name = "appendix-a1")]
    AppendixA1 {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long = "T", default_value_t = 8)]
        t: usize,
    },
}

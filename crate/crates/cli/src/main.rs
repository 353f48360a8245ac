use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;
mod error;
mod output;

use config::{Cli, ExperimentConfig};
use error::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("clockforge: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let (cfg, jobs, print_config) = ExperimentConfig::resolve(cli)?;
    if print_config {
        println!(
            "{}",
            serde_json::to_string_pretty(&cfg).expect("config serializes")
        );
        return Ok(ExitCode::SUCCESS);
    }
    let ctx = commands::Ctx::new(cfg.seed, cfg.tol, jobs)?;
    let outcome = commands::run(&cfg.command, &ctx)?;
    let text = output::render(&outcome, &cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    if let Some(s) = &outcome.summary {
        match outcome.verdict {
            Some(true) => eprintln!("PASS: {s}"),
            Some(false) => eprintln!("FAIL: {s}"),
            None => eprintln!("{s}"),
        }
    }
    Ok(match outcome.verdict {
        Some(false) => ExitCode::from(4),
        _ => ExitCode::SUCCESS,
    })
}

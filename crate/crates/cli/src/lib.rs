//! Parameter sweeps and CSV reports for the Cooper-pair pump simulator.

pub mod commands;
pub mod config;
pub mod grid;
pub mod table;

use std::path::Path;

use thiserror::Error;

pub use config::RunConfig;
pub use table::{Cell, CsvTable};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Compute(cooper_pump::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<cooper_pump::Error> for CliError {
    fn from(e: cooper_pump::Error) -> Self {
        match e {
            cooper_pump::Error::Config(msg) => CliError::Config(msg),
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Pump,
    Trace,
    Rates,
    Lzs,
}

/// A finished report and the exit code it warrants.
pub struct Report {
    pub csv: String,
    pub exit_code: u8,
}

/// Share of converged pump points below which the run exits with code 3.
pub const MIN_CONVERGED: f64 = 0.9;

/// Validates `cfg`, runs `cmd` on a pool of `cfg.workers` threads and renders
/// the CSV.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Internal(e.to_string()))?;
    let (table, exit_code) = pool.install(|| -> Result<_, CliError> {
        Ok(match cmd {
            Command::Spectrum => (commands::cmd_spectrum(cfg)?, 0),
            Command::Pump => {
                let (t, ok) = commands::cmd_pump(cfg)?;
                let code = if (ok as f64) < MIN_CONVERGED * t.rows.len() as f64 { 3 } else { 0 };
                (t, code)
            }
            Command::Trace => (commands::cmd_trace(cfg)?, 0),
            Command::Rates => (commands::cmd_rates(cfg)?, 0),
            Command::Lzs => (commands::cmd_lzs(cfg)?, 0),
        })
    })?;
    Ok(Report { csv: table.render(&cfg.fingerprint(), cfg.seed), exit_code })
}

pub fn write_output(csv: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, csv).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(csv.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

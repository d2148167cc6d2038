//! Orchestration for the `sisomap` binary: dataset generation, error-curve
//! sweeps, streaming runs and the timing harness. Each command writes its
//! outputs plus a copy of the [`RunConfig`] into the output directory; every
//! output file carries the config hash.

pub mod bench;
pub mod commands;
pub mod config;
mod dataset;

use std::fmt;

pub use bench::{BenchReport, BenchRun, MachineInfo};
pub use commands::{CurveReport, StreamQuality, StreamReport};
pub use config::{Command, DatasetKind, DatasetSpec, RunConfig};
use sisomap_core::ErrorKind;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(sisomap_core::Error),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
            CliError::Json(e) => write!(f, "json: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<sisomap_core::Error> for CliError {
    fn from(e: sisomap_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Usage => EXIT_USAGE,
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Numerical => EXIT_NUMERICAL,
            },
            CliError::Io(_) | CliError::Json(_) => EXIT_DATA,
        }
    }
}

/// Validates and runs a configuration, returning a one-line summary.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.validate()?;
    if cfg.single_thread {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
        pool.install(|| dispatch(cfg))
    } else {
        dispatch(cfg)
    }
}

fn dispatch(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.command {
        Command::Generate => commands::generate(cfg),
        Command::Curve => commands::curve(cfg).map(|r| {
            format!(
                "curve: {} points, transition {}",
                r.points,
                r.transition.transition_n.map_or("none".into(), |n| n.to_string())
            )
        }),
        Command::Stream => commands::stream(cfg).map(|r| {
            format!(
                "stream: batch {} + {} points, replay {:.4}, stacked error {}",
                r.batch_size,
                r.stream_size,
                r.replay_fidelity,
                r.stacked_error.map_or("n/a".into(), |e| format!("{e:.4}"))
            )
        }),
        Command::Bench => bench::bench(cfg).map(|r| {
            let worst = r.runs.iter().map(|x| x.speedup.unwrap_or(f64::NAN)).fold(f64::NAN, f64::min);
            format!("bench: {} runs, linearity r2 {:.4}, min speedup {worst:.2}", r.runs.len(), r.linearity_r2.unwrap_or(f64::NAN))
        }),
    }
}

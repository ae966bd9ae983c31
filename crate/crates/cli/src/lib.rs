//! Pipelines, artifacts and figure layouts for the `wavescope` command.
//!
//! A run validates its whole configuration, loads or synthesises one input
//! series and feeds it through an ordered list of stages. Every artifact is
//! listed with its SHA-256 in the run report, and a failed stage leaves a
//! `.failed` marker next to the artifacts written before it.

pub mod artifact;
pub mod config;
pub mod error;
pub mod figures;
pub mod run;
pub mod stages;
pub mod svg;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use figures::{figure_repro, Figure};
pub use run::{run, RunReport};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "WAVESCOPE_THREADS";

/// Sizes the global thread pool from [`THREADS_ENV`]; a no-op when unset.
pub fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))
}

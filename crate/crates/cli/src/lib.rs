//! Command implementations behind the `esbgk` binary.
//!
//! Exit codes: `0` converged (or battery passed), `1` configuration or
//! input error, `2` iteration limit reached, `3` hypothesis violation,
//! `4` failed verification battery.

pub mod config;
pub mod lemma;
pub mod output;
pub mod solve;
pub mod sweep;
pub mod verify;

use esbgk_core::Termination;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_BATTERY: i32 = 4;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "ESBGK_THREADS";

pub fn exit_code(termination: &Termination) -> i32 {
    match termination {
        Termination::Converged => EXIT_OK,
        Termination::MaxIter => EXIT_MAX_ITER,
        Termination::HypothesisViolation(_) => EXIT_VIOLATION,
    }
}

/// Exit code for an error raised before a report exists.
pub fn error_exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<esbgk_core::Error>() {
        Some(esbgk_core::Error::HypothesisViolation(_)) => EXIT_VIOLATION,
        _ => EXIT_CONFIG,
    }
}

/// Sizes the global thread pool from [`THREADS_ENV`] when it is set.
pub fn init_thread_pool() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("{THREADS_ENV} must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// Parses `"1, 2.5,3"`.
pub fn parse_list(text: &str) -> anyhow::Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| anyhow::anyhow!("not a number: {s:?}")))
        .collect::<anyhow::Result<_>>()?;
    if values.is_empty() {
        anyhow::bail!("empty value list");
    }
    Ok(values)
}

//! Experiment driver: grid runs over streams, methods and seeds, rank
//! reports, SVG plots and the timing benchmark.

pub mod bench;
pub mod config;
pub mod error;
pub mod plot;
pub mod results;
pub mod runner;

pub use error::{CliError, Result};

pub const VERSION: &str = concat!("sstml ", env!("CARGO_PKG_VERSION"));

/// Environment variable holding the default thread count.
pub const THREADS_ENV: &str = "SSTML_THREADS";

/// Thread count: the explicit flag, else the config value, else the
/// environment variable, else 1.
pub fn resolve_threads(flag: Option<usize>, config: Option<usize>, env: Option<&str>) -> Result<usize> {
    let from_env = match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => Some(
            s.parse::<usize>()
                .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={s:?} is not a positive integer")))?,
        ),
        None => None,
    };
    let n = flag.or(config).or(from_env).unwrap_or(1);
    if n == 0 {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    Ok(n)
}

use rayon::prelude::*;

use crate::error::CliError;

/// Runs `f` over `items` on at most `jobs` threads (0 means one per core).
/// Results come back in input order.
pub fn run<I, O, F>(jobs: usize, items: &[I], f: F) -> Result<Vec<O>, CliError>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> Result<O, CliError> + Sync + Send,
{
    if jobs == 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Data(format!("worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(f).collect())
}

//! Worker-pool plumbing.
//!
//! Parallel stages in this crate (corpus generation, GA evaluation, batch
//! encryption) always collect results in index order, so the worker count
//! changes wall time but never output bytes.

use rayon::ThreadPoolBuilder;

/// Environment variable bounding the worker count.
pub const THREADS_ENV: &str = "PERMATTACK_THREADS";

/// Worker count from `PERMATTACK_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` inside a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    let pool = ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("failed to build worker pool");
    pool.install(f)
}

/// Runs `f` with the pool size taken from the environment, or rayon's default.
pub fn with_env_workers<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match threads_from_env() {
        Some(n) => with_workers(n, f),
        None => f(),
    }
}

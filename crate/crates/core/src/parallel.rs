//! Worker pool sizing shared by sweeps and oracle jobs.

use rayon::ThreadPool;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ROUTER_THREADS";

/// Thread cap from the environment; `None` means rayon's default.
pub fn thread_cap() -> Option<usize> {
    let raw = std::env::var(THREADS_ENV).ok()?;
    match raw.trim().parse::<usize>() {
        Ok(0) | Err(_) => {
            log::warn!("ignoring {THREADS_ENV}={raw:?}: expected a positive integer");
            None
        }
        Ok(n) => Some(n),
    }
}

fn pool(threads: Option<usize>) -> ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().expect("failed to start worker threads")
}

/// Runs `f` inside a pool sized by [`THREADS_ENV`].
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool(thread_cap()).install(f)
}

/// Runs `f` inside a pool with exactly `threads` workers.
pub fn install_with<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    pool(Some(threads.max(1))).install(f)
}

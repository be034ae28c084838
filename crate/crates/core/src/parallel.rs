//! Ordered parallel map over independent work items (restarts, trials).
//!
//! Thread count comes from `FHNVS_THREADS` (default 1). Results are always
//! collected in item order, so output does not depend on the thread count.

use std::sync::OnceLock;

use rayon::prelude::*;

pub const THREADS_ENV: &str = "FHNVS_THREADS";

pub fn configured_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1)
}

fn pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = configured_threads();
        if n <= 1 {
            None
        } else {
            rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()
        }
    })
    .as_ref()
}

pub fn ordered_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    match pool() {
        Some(p) => p.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()),
        None => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}

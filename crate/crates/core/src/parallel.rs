//! Worker pool shared by data-parallel evaluations.
//!
//! The pool size is capped by the `RESIST_THREADS` environment variable;
//! without it the machine parallelism is used. All parallel loops in this
//! crate reduce in a fixed order, so the thread count never changes results.

use std::sync::OnceLock;

static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();

pub fn pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        let threads = std::env::var("RESIST_THREADS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("worker pool")
    })
}

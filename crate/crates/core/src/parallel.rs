//! Order-preserving parallel map over a dedicated thread pool.

use rayon::prelude::*;

/// Evaluates `f(0..n)` on `jobs` threads and returns the results in index
/// order. `jobs <= 1` runs serially on the calling thread; `jobs == 0` is
/// treated as 1. Since every task is independent, the output is identical
/// for any `jobs`.
pub fn par_map<T, F>(jobs: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if jobs <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        // no threads available: same results, just slower
        Err(_) => (0..n).map(f).collect(),
    }
}

//! Parallel-map capability handed down from the CLI.
//!
//! Modules never spawn threads themselves; they receive a `Pool` and call
//! `map_indexed`. Results are collected in index order, so reductions are
//! deterministic regardless of thread count. With the `parallel` feature
//! disabled the same API runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Worker pool wrapper. `threads = 1` forces sequential execution even in
/// parallel builds, which the benchmarks use as the baseline.
pub struct Pool {
    threads: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Pool {
    /// `threads = None` uses the hardware parallelism.
    pub fn new(threads: Option<usize>) -> Self {
        let threads = threads.unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        });
        #[cfg(feature = "parallel")]
        {
            let pool = if threads > 1 {
                rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()
            } else {
                None
            };
            Pool { threads, pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Pool { threads }
        }
    }

    pub fn sequential() -> Self {
        Self::new(Some(1))
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Apply `f` to 0..n, returning results in index order.
    pub fn map_indexed<U: Send, F: Fn(usize) -> U + Sync + Send>(&self, n: usize, f: F) -> Vec<U> {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| (0..n).into_par_iter().map(f).collect());
        }
        (0..n).map(f).collect()
    }
}

impl Default for Pool {
    fn default() -> Self {
        Self::new(None)
    }
}

/// Pairwise (cascade) summation: deterministic and more accurate than a
/// running sum for long reductions.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

//! Execution back-ends for per-node work.
//!
//! Every parallel operation in the simulator is an order-preserving map over
//! node (or sweep point) indices. Reductions are always done afterwards, on
//! the collected vector, in ascending index order, so the choice of back-end
//! and the thread count never change a single bit of the output.

/// How per-node work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Plain loop on the calling thread.
    #[default]
    Sequential,
    /// Rayon work-stealing on the current thread pool.
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Exec {
    /// The parallel back-end when compiled in, sequential otherwise.
    pub fn best_available() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Exec::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Exec::Parallel => "parallel",
        }
    }

    /// Maps `f` over `0..len`, returning results in index order.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..len).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
        }
    }

    /// Runs `f` inside a dedicated pool of `workers` threads (parallel
    /// back-end only). The sequential back-end ignores `workers`.
    pub fn with_workers<R, F>(self, workers: Option<usize>, f: F) -> R
    where
        R: Send,
        F: FnOnce() -> R + Send,
    {
        match (self, workers) {
            #[cfg(feature = "parallel")]
            (Exec::Parallel, Some(w)) => match rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
            {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            _ => f(),
        }
    }
}

//! Chunked map-reduce over path indices.
//!
//! Paths are split into fixed-size chunks that do not depend on the worker
//! count. Each chunk is folded sequentially in index order, chunk results are
//! collected in chunk order and merged left to right, so the result is
//! bit-identical for any schedule, including floating-point sums.

#[cfg(feature = "parallel")]
use crate::error::LabError;
use crate::error::Result;

/// Paths per chunk.
pub const CHUNK_PATHS: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `workers = 0` uses rayon's global pool.
    #[cfg(feature = "parallel")]
    Parallel {
        workers: usize,
    },
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel { workers: 0 }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Parallel with `workers` threads when built with the `parallel` feature, sequential otherwise.
    pub fn with_workers(workers: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            if workers == 1 {
                Execution::Sequential
            } else {
                Execution::Parallel { workers }
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            Execution::Sequential
        }
    }

    /// Folds `fold` over `0..n_paths` and merges the per-chunk accumulators.
    pub fn map_reduce<A, I, F, M>(&self, n_paths: u64, identity: I, fold: F, merge: M) -> Result<A>
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, u64) -> Result<()> + Sync + Send,
        M: Fn(A, A) -> A,
    {
        let n_chunks = n_paths.div_ceil(CHUNK_PATHS);
        let run_chunk = |k: u64| -> Result<A> {
            let mut acc = identity();
            let end = ((k + 1) * CHUNK_PATHS).min(n_paths);
            for idx in k * CHUNK_PATHS..end {
                fold(&mut acc, idx)?;
            }
            Ok(acc)
        };

        let chunks: Vec<A> = match *self {
            Execution::Sequential => (0..n_chunks).map(run_chunk).collect::<Result<_>>()?,
            #[cfg(feature = "parallel")]
            Execution::Parallel { workers } => {
                use rayon::prelude::*;
                let job = || {
                    (0..n_chunks)
                        .into_par_iter()
                        .map(run_chunk)
                        .collect::<Result<Vec<A>>>()
                };
                if workers == 0 {
                    job()?
                } else {
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .build()
                        .map_err(|e| LabError::Pool(e.to_string()))?
                        .install(job)?
                }
            }
        };

        Ok(chunks.into_iter().fold(identity(), merge))
    }
}

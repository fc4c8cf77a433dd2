//! Block streaming over `[start, end]`.
//!
//! Blocks are aligned to multiples of the block size (`[1 + kB, 1 + (k+1)B)`)
//! regardless of the starting point or worker count. Each wave of blocks is
//! produced on the worker pool and then consumed strictly in ascending order,
//! so anything accumulated by the consumer is bit-identical for any number
//! of workers.

use std::path::{Path, PathBuf};
#[cfg(feature = "parallel")]
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sieve::{isqrt, BasePrimes, DEFAULT_BLOCK_SIZE};

/// Default cap on the largest integer a stream may reach.
pub const DEFAULT_N_CAP: u64 = 1_000_000_000;

#[derive(Clone)]
enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel(Arc<rayon::ThreadPool>),
}

/// Drives block-wise computations; cheap to clone.
#[derive(Clone)]
pub struct Summator {
    block_size: usize,
    n_cap: u64,
    workers: usize,
    exec: Execution,
    prime_cache: Option<PathBuf>,
}

impl std::fmt::Debug for Summator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Summator")
            .field("block_size", &self.block_size)
            .field("n_cap", &self.n_cap)
            .field("workers", &self.workers)
            .field("prime_cache", &self.prime_cache)
            .finish()
    }
}

impl Default for Summator {
    fn default() -> Self {
        Self::sequential()
    }
}

impl Summator {
    pub fn sequential() -> Self {
        Self {
            block_size: DEFAULT_BLOCK_SIZE,
            n_cap: DEFAULT_N_CAP,
            workers: 1,
            exec: Execution::Sequential,
            prime_cache: None,
        }
    }

    /// A summator running on `workers` threads. Without the `parallel`
    /// feature every worker count falls back to sequential execution.
    pub fn with_workers(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        if workers == 1 {
            return Ok(Self::sequential());
        }
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(Self {
                workers,
                exec: Execution::Parallel(Arc::new(pool)),
                ..Self::sequential()
            })
        }
        #[cfg(not(feature = "parallel"))]
        {
            Ok(Self {
                workers,
                ..Self::sequential()
            })
        }
    }

    pub fn with_block_size(mut self, block_size: usize) -> Self {
        assert!(block_size > 0, "block size must be positive");
        self.block_size = block_size;
        self
    }

    pub fn with_cap(mut self, n_cap: u64) -> Self {
        self.n_cap = n_cap;
        self
    }

    /// Directory for base-prime cache files; unreadable caches are rebuilt.
    pub fn with_prime_cache(mut self, dir: impl Into<PathBuf>) -> Self {
        self.prime_cache = Some(dir.into());
        self
    }

    pub fn prime_cache(&self) -> Option<&Path> {
        self.prime_cache.as_deref()
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn n_cap(&self) -> u64 {
        self.n_cap
    }

    pub(crate) fn check_cap(&self, n: u64) -> Result<()> {
        if n > self.n_cap {
            return Err(Error::BoundExceedsCap {
                requested: n,
                cap: self.n_cap,
            });
        }
        Ok(())
    }

    fn block_ranges(&self, start: u64, end: u64) -> Vec<(u64, u64)> {
        let b = self.block_size as u64;
        let mut out = Vec::new();
        let mut lo = start;
        while lo <= end {
            let k = (lo - 1) / b;
            let hi = (1 + (k + 1) * b).min(end + 1);
            out.push((lo, hi));
            lo = hi;
        }
        out
    }

    /// Produces every block of `[start, end]` with `produce(lo, hi, base)` and
    /// hands the results to `consume(lo, item)` in ascending order.
    pub(crate) fn stream<T, P, C>(&self, start: u64, end: u64, produce: P, mut consume: C) -> Result<()>
    where
        T: Send,
        P: Fn(u64, u64, &BasePrimes) -> Result<T> + Sync,
        C: FnMut(u64, T) -> Result<()>,
    {
        if start > end {
            return Ok(());
        }
        if start == 0 {
            return Err(Error::InvalidRange { lo: start, hi: end + 1 });
        }
        self.check_cap(end)?;
        let base = match &self.prime_cache {
            Some(dir) => BasePrimes::cached(dir, isqrt(end)),
            None => BasePrimes::for_limit(end + 1),
        };
        let ranges = self.block_ranges(start, end);
        let wave = (2 * self.workers).max(1);
        for chunk in ranges.chunks(wave) {
            let items = self.produce_wave(chunk, &base, &produce)?;
            for (&(lo, _), item) in chunk.iter().zip(items) {
                consume(lo, item)?;
            }
        }
        Ok(())
    }

    fn produce_wave<T, P>(&self, chunk: &[(u64, u64)], base: &BasePrimes, produce: &P) -> Result<Vec<T>>
    where
        T: Send,
        P: Fn(u64, u64, &BasePrimes) -> Result<T> + Sync,
    {
        match &self.exec {
            Execution::Sequential => chunk.iter().map(|&(lo, hi)| produce(lo, hi, base)).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel(pool) => {
                use rayon::prelude::*;
                pool.install(|| {
                    chunk
                        .par_iter()
                        .map(|&(lo, hi)| produce(lo, hi, base))
                        .collect()
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_aligned_and_cover() {
        let s = Summator::sequential().with_block_size(10);
        assert_eq!(s.block_ranges(1, 25), vec![(1, 11), (11, 21), (21, 26)]);
        assert_eq!(s.block_ranges(7, 25), vec![(7, 11), (11, 21), (21, 26)]);
        assert_eq!(s.block_ranges(11, 11), vec![(11, 12)]);
        assert!(s.block_ranges(12, 11).is_empty());
    }

    #[test]
    fn stream_visits_in_order() {
        for workers in [1, 3] {
            let s = Summator::with_workers(workers).unwrap().with_block_size(7);
            let mut seen = Vec::new();
            s.stream(
                1,
                100,
                |lo, hi, _| Ok((lo..hi).collect::<Vec<_>>()),
                |_, v| {
                    seen.extend(v);
                    Ok(())
                },
            )
            .unwrap();
            assert_eq!(seen, (1..=100).collect::<Vec<_>>());
        }
    }

    #[test]
    fn prime_cache_is_written_and_reused() {
        let dir = tempfile::tempdir().unwrap();
        let s = Summator::sequential().with_block_size(100).with_prime_cache(dir.path());
        let collect = |s: &Summator| {
            let mut n = 0u64;
            s.stream(1, 10_000, |lo, hi, _| Ok(hi - lo), |_, k| {
                n += k;
                Ok(())
            })
            .unwrap();
            n
        };
        assert_eq!(collect(&s), 10_000);
        assert!(dir.path().join("primes-100.bin").exists());
        assert_eq!(collect(&s), 10_000);
    }

    #[test]
    fn cap_and_workers_are_enforced() {
        let s = Summator::sequential().with_cap(50);
        let r = s.stream(1, 51, |_, _, _| Ok(()), |_, _| Ok(()));
        assert!(matches!(r, Err(Error::BoundExceedsCap { .. })));
        assert!(Summator::with_workers(0).is_err());
    }
}

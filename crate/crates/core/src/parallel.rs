//! Deterministic chunked map-reduce over replications.
//!
//! Replications are cut into fixed-size chunks whose boundaries do not depend
//! on the worker count. Chunks may run on any thread; their results are folded
//! strictly in chunk order, so floating-point reductions are bit-identical for
//! every worker count.

use rayon::prelude::*;
use std::ops::Range;

pub const CHUNK: u64 = 4096;

pub fn chunked_reduce<T, M, F>(reps: u64, workers: usize, map: M, fold: F, init: T) -> T
where
    T: Send,
    M: Fn(Range<u64>) -> T + Sync + Send,
    F: Fn(T, T) -> T,
{
    let chunks: Vec<Range<u64>> = (0..reps.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(reps))
        .collect();
    let parts: Vec<T> = if workers <= 1 {
        chunks.into_iter().map(&map).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| chunks.into_par_iter().map(&map).collect())
    };
    parts.into_iter().fold(init, fold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_sum_is_worker_independent() {
        let f = |r: Range<u64>| r.map(|i| 1.0 / (i as f64 + 1.0)).sum::<f64>();
        let one = chunked_reduce(100_000, 1, f, |a, b| a + b, 0.0);
        let eight = chunked_reduce(100_000, 8, f, |a, b| a + b, 0.0);
        assert_eq!(one.to_bits(), eight.to_bits());
    }

    #[test]
    fn empty_range() {
        let total = chunked_reduce(0, 4, |r: Range<u64>| r.count() as u64, |a, b| a + b, 0);
        assert_eq!(total, 0);
    }
}

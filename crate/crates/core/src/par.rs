//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the work items run on the rayon pool;
//! without it they run in order on the calling thread. Results always come
//! back in index order and callers reduce them sequentially, so outputs are
//! identical either way.

/// Evaluate `f(0), …, f(n-1)` and collect the results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Split `total` items into chunks of at most `chunk` and return
/// `(chunk_index, start, len)` triples.
pub fn chunks(total: u64, chunk: u64) -> Vec<(u64, u64, u64)> {
    let chunk = chunk.max(1);
    let n = total.div_ceil(chunk);
    (0..n)
        .map(|i| {
            let start = i * chunk;
            (i, start, chunk.min(total - start))
        })
        .collect()
}

/// Run `f` with every parallel helper confined to the calling thread.
#[cfg(feature = "parallel")]
pub fn sequential<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("single-thread pool")
        .install(f)
}

#[cfg(not(feature = "parallel"))]
pub fn sequential<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    f()
}

/// Number of worker threads currently available.
pub fn workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Cap the global pool at `threads` workers (the `POLYRANGE_THREADS`
/// setting). Only the first call has an effect.
pub fn init_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_total() {
        let c = chunks(10, 4);
        assert_eq!(c, vec![(0, 0, 4), (1, 4, 4), (2, 8, 2)]);
        assert!(chunks(0, 4).is_empty());
    }

    #[test]
    fn map_preserves_order() {
        let v = map_indexed(100, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }
}

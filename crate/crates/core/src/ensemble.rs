//! Indexed parallel map over independent tasks.
//!
//! With the `parallel` feature (default) tasks run on the rayon pool; without
//! it they run in order on the calling thread. Results are always returned in
//! index order, so downstream output does not depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f)` on the rayon pool when `parallel` is enabled.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_sequential(n, f)
    }
}

pub fn map_indexed_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Maps in chunks of `chunk` tasks and folds each finished chunk into `acc`
/// in index order, bounding peak memory for large ensembles.
pub fn map_fold_chunked<T, A, F, G>(n: usize, chunk: usize, f: F, mut acc: A, mut fold: G) -> A
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    G: FnMut(&mut A, usize, T),
{
    let chunk = chunk.max(1);
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        let part = map_indexed(end - start, |i| f(start + i));
        for (i, t) in part.into_iter().enumerate() {
            fold(&mut acc, start + i, t);
        }
        start = end;
    }
    acc
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Sizes the global worker pool. Returns `false` if the pool was already
/// built or the crate runs sequentially.
pub fn set_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

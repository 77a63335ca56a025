//! Index-parallel map with a sequential fallback.
//!
//! All batch loops in the crate route through [`map_indices`]. With the
//! `parallel` feature (default) the map runs on the rayon pool; without it the
//! same closure runs sequentially. Results are collected in index order and
//! all reductions happen sequentially afterwards, so the two builds produce
//! bit-identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to `0..n` and returns the results in index order.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
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
        (0..n).map(f).collect()
    }
}

/// Like [`map_indices`] but for fallible work: stops at the first error in
/// index order.
pub fn try_map_indices<T, E, F>(n: usize, f: F) -> std::result::Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> std::result::Result<T, E> + Sync + Send,
{
    let items = map_indices(n, f);
    items.into_iter().collect()
}

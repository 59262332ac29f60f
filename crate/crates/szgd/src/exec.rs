//! Data-parallel execution of independent work items.
//!
//! Monte Carlo trials and experiment runs are embarrassingly parallel: item
//! `i` derives all of its randomness from a substream keyed by `i`, so the
//! result is a pure function of the index. [`map_indexed`] fans those items
//! out over rayon when the `parallel` feature is enabled (the default) and
//! falls back to a plain loop otherwise. Results come back ordered by index
//! and any reduction over them happens sequentially, so output is
//! bit-identical regardless of feature flags or thread count.
//! [`map_indexed_seq`] is always the plain loop; the bench suite uses it to
//! measure the parallel speedup.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Apply `f` to `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Apply `f` to `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Sequential reference implementation of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_sequential() {
        let f = |i: usize| (i as f64).sqrt().sin();
        assert_eq!(map_indexed(1000, f), map_indexed_seq(1000, f));
    }
}

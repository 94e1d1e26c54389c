//! Parallel/sequential switch for the data-parallel loops.
//!
//! Every helper preserves input order, so the reduction order of any caller is the
//! same with and without the `parallel` feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting in index order.
pub(crate) fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    let out = (0..n).into_par_iter().map(f).collect();

    #[cfg(not(feature = "parallel"))]
    let out = (0..n).map(f).collect();

    out
}

/// Maps `f` over a slice, collecting in slice order.
pub(crate) fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    let out = items.par_iter().map(f).collect();

    #[cfg(not(feature = "parallel"))]
    let out = items.iter().map(f).collect();

    out
}

/// Runs `f(row_index, row)` over each `width`-long row of `buf`.
pub(crate) fn for_each_row<T, F>(buf: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if width == 0 {
        return;
    }

    #[cfg(feature = "parallel")]
    buf.par_chunks_mut(width)
        .enumerate()
        .for_each(|(y, row)| f(y, row));

    #[cfg(not(feature = "parallel"))]
    buf.chunks_mut(width)
        .enumerate()
        .for_each(|(y, row)| f(y, row));
}

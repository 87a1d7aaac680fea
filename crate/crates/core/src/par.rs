//! Row-parallel helpers. With the `parallel` feature rows are distributed
//! over the current rayon pool; each row is computed by the same code either
//! way, so output does not depend on the schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Calls `f(row_index, row)` for each `row_len`-sized chunk of `out`.
pub(crate) fn for_each_row<T, F>(out: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_chunks_mut(row_len).enumerate().for_each(|(y, row)| f(y, row));
    #[cfg(not(feature = "parallel"))]
    out.chunks_mut(row_len).enumerate().for_each(|(y, row)| f(y, row));
}

/// Like [`for_each_row`] but also collects one value per row, in row order.
pub(crate) fn map_rows<T, R, F>(out: &mut [T], row_len: usize, f: F) -> alloc::vec::Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, &mut [T]) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(row_len)
            .enumerate()
            .map(|(y, row)| f(y, row))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.chunks_mut(row_len).enumerate().map(|(y, row)| f(y, row)).collect()
    }
}

/// Maps independent jobs, preserving input order.
pub(crate) fn map_jobs<I, R, F>(items: &[I], f: F) -> alloc::vec::Vec<R>
where
    I: Sync,
    R: Send,
    F: Fn(&I) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

//! Row-parallel execution with a sequential fallback.
//!
//! Every per-pixel stage in this crate is written as "fill one output row
//! from read-only inputs". [`Exec`] decides whether rows are distributed over
//! the rayon pool or processed in order on the calling thread. Rows never
//! share state, so both paths produce bit-identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a per-pixel stage is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    /// Rows are processed in order on the calling thread.
    Sequential,
    /// Rows are spread over the current rayon pool. Without the `parallel`
    /// feature this behaves like [`Exec::Sequential`].
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Calls `f(y, row)` for every `width`-long row of `out`.
    pub(crate) fn for_each_row<T, F>(self, out: &mut [T], width: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        debug_assert!(width > 0 && out.len().is_multiple_of(width));
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => out
                .par_chunks_mut(width)
                .enumerate()
                .for_each(|(y, row)| f(y, row)),
            _ => out
                .chunks_mut(width)
                .enumerate()
                .for_each(|(y, row)| f(y, row)),
        }
    }

    /// Like [`Exec::for_each_row`] for two outputs of the same shape.
    pub(crate) fn for_each_row2<A, B, F>(self, a: &mut [A], b: &mut [B], width: usize, f: F)
    where
        A: Send,
        B: Send,
        F: Fn(usize, &mut [A], &mut [B]) + Sync + Send,
    {
        debug_assert_eq!(a.len(), b.len());
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => a
                .par_chunks_mut(width)
                .zip(b.par_chunks_mut(width))
                .enumerate()
                .for_each(|(y, (ra, rb))| f(y, ra, rb)),
            _ => a
                .chunks_mut(width)
                .zip(b.chunks_mut(width))
                .enumerate()
                .for_each(|(y, (ra, rb))| f(y, ra, rb)),
        }
    }
}

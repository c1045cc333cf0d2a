//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (the default) these fan out over the current
//! rayon thread pool; without it they run in plain loops. Both variants
//! produce outputs in index order, and callers reduce collected results
//! sequentially, so numerical output is bit-identical either way.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Apply `f` to matching rows of two flat row-major buffers.
#[cfg(feature = "parallel")]
pub(crate) fn for_each_row_pair<A, B, F>(a: &mut [A], b: &mut [B], row_a: usize, row_b: usize, f: F)
where
    A: Send,
    B: Send,
    F: Fn(usize, &mut [A], &mut [B]) + Sync + Send,
{
    use rayon::prelude::*;
    a.par_chunks_mut(row_a)
        .zip(b.par_chunks_mut(row_b))
        .enumerate()
        .for_each(|(i, (ra, rb))| f(i, ra, rb));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_row_pair<A, B, F>(a: &mut [A], b: &mut [B], row_a: usize, row_b: usize, f: F)
where
    A: Send,
    B: Send,
    F: Fn(usize, &mut [A], &mut [B]) + Sync + Send,
{
    for (i, (ra, rb)) in a.chunks_mut(row_a).zip(b.chunks_mut(row_b)).enumerate() {
        f(i, ra, rb);
    }
}

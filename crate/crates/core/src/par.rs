// Data-parallel helpers. Every helper produces the same bits with or without
// the `parallel` feature: maps collect in index order and reductions combine
// fixed-size chunks sequentially.

use alloc::vec::Vec;

/// Chunk length for reductions; fixed so the summation tree never depends on
/// the pool size.
pub const REDUCE_CHUNK: usize = 4096;

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
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    F: Fn(&S) -> T,
{
    items.iter().map(f).collect()
}

/// Calls `f(chunk_index, chunk)` over `data.chunks_mut(chunk)`.
#[cfg(feature = "parallel")]
pub fn for_each_chunk_mut<F>(data: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    use rayon::prelude::*;
    data.par_chunks_mut(chunk.max(1)).enumerate().for_each(|(i, c)| f(i, c));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_chunk_mut<F>(data: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]),
{
    data.chunks_mut(chunk.max(1)).enumerate().for_each(|(i, c)| f(i, c));
}

/// Deterministic sum of `f(i)` for `i in 0..n`.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let partial = map_indexed(chunks, |k| {
        let lo = k * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(n);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    });
    partial.into_iter().sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_indexed(a.len(), |i| a[i] * b[i])
}

//! Index-loop execution helpers with a data-parallel fast path.
//!
//! With the `parallel` feature (on by default) the helpers fan work out over
//! rayon; without it they compile to plain loops. Reductions resolve exact
//! comparator ties toward the smallest index, which makes the merge
//! associative and commutative, so parallel results are byte-identical to
//! sequential ones regardless of how rayon splits the range. The `_serial`
//! twins always run sequentially and exist so benchmarks can compare both
//! paths within one build.

use std::cmp::Ordering;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `f` mapped over `0..n`, collected in index order.
#[cfg(feature = "parallel")]
pub fn map_indices<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// `f` mapped over `0..n`, collected in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indices<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    map_indices_serial(n, f)
}

/// Sequential twin of [`map_indices`].
pub fn map_indices_serial<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Minimum of `f(i)` over `0..n` under `cmp`, ties to the smallest index;
/// `None` when `n == 0`.
#[cfg(feature = "parallel")]
pub fn min_by_index<T: Send>(
    n: usize,
    f: impl Fn(usize) -> T + Sync + Send,
    cmp: impl Fn(&T, &T) -> Ordering + Sync + Send,
) -> Option<T> {
    (0..n)
        .into_par_iter()
        .map(|i| (i, f(i)))
        .reduce_with(|a, b| pick(a, b, &cmp))
        .map(|(_, value)| value)
}

/// Minimum of `f(i)` over `0..n` under `cmp`, ties to the smallest index;
/// `None` when `n == 0`.
#[cfg(not(feature = "parallel"))]
pub fn min_by_index<T: Send>(
    n: usize,
    f: impl Fn(usize) -> T + Sync + Send,
    cmp: impl Fn(&T, &T) -> Ordering + Sync + Send,
) -> Option<T> {
    min_by_index_serial(n, f, cmp)
}

/// Sequential twin of [`min_by_index`].
pub fn min_by_index_serial<T>(
    n: usize,
    f: impl Fn(usize) -> T,
    cmp: impl Fn(&T, &T) -> Ordering,
) -> Option<T> {
    (0..n)
        .map(|i| (i, f(i)))
        .reduce(|a, b| pick(a, b, &cmp))
        .map(|(_, value)| value)
}

fn pick<T>(a: (usize, T), b: (usize, T), cmp: &impl Fn(&T, &T) -> Ordering) -> (usize, T) {
    match cmp(&a.1, &b.1) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if a.0 <= b.0 {
                a
            } else {
                b
            }
        }
    }
}

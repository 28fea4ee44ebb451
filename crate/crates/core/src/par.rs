//! Feature-gated data parallelism. With `parallel` enabled the helpers fan
//! work out over rayon; without it they run the same closures sequentially.
//! Reductions carry a candidate index and compare `(value, index)` pairs,
//! so results are deterministic in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Ordered map over an index range.
pub(crate) fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
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

/// Ordered map over a slice.
pub(crate) fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
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

/// Index of the minimal value over `0..n`, ties resolved toward the smaller
/// index. `score` must never return NaN.
pub(crate) fn argmin_range<F>(n: usize, score: F) -> (usize, f64)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    debug_assert!(n > 0);
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map(|i| (i, score(i)))
            .reduce(|| (usize::MAX, f64::INFINITY), better)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(|i| (i, score(i))).fold((usize::MAX, f64::INFINITY), better)
    }
}

fn better(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) the maps below run on the
//! rayon global pool; without it they are plain iterator maps. Either way the
//! output order matches the input order, so reductions performed by callers
//! over the returned vectors are bit-identical between the two backends.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Name of the active backend, used to tag benchmark ids.
#[cfg(feature = "parallel")]
pub const BACKEND: &str = "rayon";
#[cfg(not(feature = "parallel"))]
pub const BACKEND: &str = "sequential";

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Index of the smallest value; the lowest index wins ties and NaNs are skipped.
pub fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

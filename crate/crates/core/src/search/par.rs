//! Task fan-out: rayon when the `parallel` feature is enabled, a plain loop
//! otherwise. Results always come back in task order.

#[cfg(feature = "parallel")]
pub(crate) fn map_tasks<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_tasks<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

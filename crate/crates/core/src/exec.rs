//! Execution layer: data-parallel map over independent work items.
//!
//! All ensemble loops (realizations, grid points, entropy seeds) funnel
//! through [`map_indexed`]. With the `parallel` feature (default) the
//! `Parallel` mode fans work out over rayon; without it, or in `Sequential`
//! mode, the same closure runs in a plain loop. Outputs are collected in
//! index order either way, so results are identical for any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        ExecMode::Parallel
    }
}

/// Apply `f` to every index in `0..n` and collect results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => map_parallel(n, f),
    }
}

#[cfg(feature = "parallel")]
fn map_parallel<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_parallel<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    // sequential fallback when rayon is compiled out
    (0..n).map(f).collect()
}

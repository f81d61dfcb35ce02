//! Row-parallel execution helpers. The parallel and sequential paths share
//! the same row decomposition and per-row arithmetic, so results are
//! bitwise identical regardless of thread count or feature selection.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sizes the global worker pool; callable once, before any parallel work.
#[cfg(feature = "parallel")]
pub fn build_global_pool(threads: usize) -> Result<(), rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
}

/// Applies `body(j, row)` to each `theta`-row of a plane buffer.
#[cfg(feature = "parallel")]
pub fn for_each_row(out: &mut [f64], n_r: usize, body: impl Fn(usize, &mut [f64]) + Sync) {
    out.par_chunks_mut(n_r)
        .enumerate()
        .for_each(|(j, row)| body(j, row));
}

/// Sequential fallback with the identical decomposition.
#[cfg(not(feature = "parallel"))]
pub fn for_each_row(out: &mut [f64], n_r: usize, body: impl Fn(usize, &mut [f64]) + Sync) {
    for (j, row) in out.chunks_mut(n_r).enumerate() {
        body(j, row);
    }
}

/// Explicit sequential variant, kept callable under any feature set so the
/// benches can compare both paths in one binary.
pub fn for_each_row_seq(out: &mut [f64], n_r: usize, body: impl Fn(usize, &mut [f64]) + Sync) {
    for (j, row) in out.chunks_mut(n_r).enumerate() {
        body(j, row);
    }
}

/// Maps rows to values and combines them in index order; parallel map,
/// deterministic combine.
#[cfg(feature = "parallel")]
pub fn map_rows_collect<T: Send>(
    n_theta: usize,
    body: impl Fn(usize) -> T + Sync + Send,
) -> Vec<T> {
    (0..n_theta).into_par_iter().map(body).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_rows_collect<T: Send>(
    n_theta: usize,
    body: impl Fn(usize) -> T + Sync + Send,
) -> Vec<T> {
    (0..n_theta).map(body).collect()
}

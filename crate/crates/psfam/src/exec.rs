//! Execution-mode selection for the data-parallel hot loops.
//!
//! All parallel work in this crate is expressed as order-preserving maps over
//! an index range, so the parallel and sequential paths produce identical
//! results (including floating-point results: reductions are performed over
//! the ordered per-index outputs, never in scheduler-dependent order).

/// Which execution backend to use for a data-parallel operation.
///
/// With the `parallel` feature disabled, [`Parallelism::Rayon`] silently falls
/// back to the sequential path, so library code can pass it unconditionally.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    /// Plain single-threaded iteration.
    Sequential,
    /// rayon work-stealing iteration (the default when the `parallel`
    /// feature is enabled).
    Rayon,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Rayon
        } else {
            Parallelism::Sequential
        }
    }
}

/// Order-preserving indexed map: computes `f(0), ..., f(n-1)` and returns the
/// results in index order regardless of execution mode.
pub(crate) fn map_ordered<T, F>(n: usize, mode: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        Parallelism::Sequential => (0..n).map(f).collect(),
        Parallelism::Rayon => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the map fans out over the rayon pool when the
//! caller asks for it; otherwise it runs in place. Results are always returned
//! in input order so downstream folds stay deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map_indexed<T, F>(len: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel && len > 1 {
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    (0..len).map(f).collect()
}

/// Whether the crate was compiled with rayon support.
pub const fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}

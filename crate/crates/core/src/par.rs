//! Order-preserving map over a slice, parallel when the `parallel` feature
//! is enabled and the caller asks for it.
//!
//! Output order always matches input order, so reductions performed on the
//! result are identical whichever path ran.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether this build can run in parallel at all.
pub const AVAILABLE: bool = cfg!(feature = "parallel");

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], _parallel: bool, f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

//! Small helpers that switch between rayon and sequential execution.
//!
//! With the `parallel` feature (default) chunked work is distributed over the
//! rayon pool; without it everything runs on the calling thread. Chunk results
//! are always collected in index order and merged sequentially, so results do
//! not depend on thread count or work stealing.

/// Work items smaller than this are not worth scheduling on the pool.
pub(crate) const PAR_MIN_LEN: usize = 1 << 14;

#[cfg(feature = "parallel")]
pub(crate) fn map_chunks<T, F>(n_chunks: usize, small: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if small {
        (0..n_chunks).map(f).collect()
    } else {
        (0..n_chunks).into_par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_chunks<T, F>(n_chunks: usize, _small: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n_chunks).map(f).collect()
}

/// Shared mutable pointer for disjoint-index writes from rayon workers.
///
/// Safety contract: every parallel iteration must write through a distinct set
/// of indices. The gate kernels guarantee this by construction (each pair/quad
/// of amplitude indices is visited exactly once).
#[cfg(feature = "parallel")]
pub(crate) struct SendPtr<T>(pub *mut T);

#[cfg(feature = "parallel")]
unsafe impl<T: Send> Send for SendPtr<T> {}
#[cfg(feature = "parallel")]
unsafe impl<T: Send> Sync for SendPtr<T> {}

#[cfg(feature = "parallel")]
impl<T> SendPtr<T> {
    pub(crate) fn get(&self) -> *mut T {
        self.0
    }
}

#[cfg(feature = "parallel")]
impl<T> Clone for SendPtr<T> {
    fn clone(&self) -> Self {
        *self
    }
}

#[cfg(feature = "parallel")]
impl<T> Copy for SendPtr<T> {}

//! Parallel-iterator prelude with a sequential fallback.
//!
//! With the default `parallel` feature this re-exports rayon's prelude, so
//! `into_par_iter` fans out over the global thread pool. Without the feature
//! (single-threaded targets such as wasm32-unknown-unknown, where spawning
//! worker threads traps at runtime) the same method name resolves to a plain
//! sequential iterator, and no thread pool is ever created.

#[cfg(feature = "parallel")]
pub(crate) use rayon::prelude;

#[cfg(not(feature = "parallel"))]
pub(crate) mod prelude {
    pub(crate) trait IntoParallelIterator: IntoIterator + Sized {
        fn into_par_iter(self) -> Self::IntoIter {
            self.into_iter()
        }
    }

    impl<T: IntoIterator> IntoParallelIterator for T {}
}

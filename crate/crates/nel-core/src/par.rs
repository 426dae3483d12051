//! Order-preserving data-parallel helpers.
//!
//! Each helper maps independent elements and collects results in input order.
//! Because no floating-point reduction ever crosses element boundaries, the
//! output is bit-identical for any thread count and identical to the
//! sequential fallback compiled without the `parallel` feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over a slice, collecting in order.
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
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

/// Map over an index range, collecting in order.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
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

/// Configure the global thread pool. `0` keeps the library default (one
/// worker per logical core). Calling twice is a no-op; errors from an
/// already-initialized pool are ignored. Without the `parallel` feature this
/// does nothing.
pub fn configure_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
    }
}

/// Run `f` inside a scoped pool of `n` threads (`0` = default size). Used by
/// tests to check that results do not depend on the worker count.
pub fn with_threads<R, F>(n: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if n > 0 {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().expect("thread pool");
        pool.install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        f()
    }
}

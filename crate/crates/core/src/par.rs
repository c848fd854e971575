//! Optional data parallelism: rayon when the `parallel` feature is enabled
//! and requested at run time, a sequential loop otherwise. Results are always
//! returned in input order.

/// Map `f` over `items`, in parallel when `parallel` is set and the feature
/// is compiled in.
pub fn map<T, R, F>(parallel: bool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel && items.len() > 1 {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// `true` iff `f` holds for every item (short-circuits sequentially).
pub fn all<T, F>(parallel: bool, items: &[T], f: F) -> bool
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel && items.len() > 1 {
            use rayon::prelude::*;
            return items.par_iter().all(f);
        }
    }
    let _ = parallel;
    items.iter().all(f)
}

/// Whether parallel execution is compiled in.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}

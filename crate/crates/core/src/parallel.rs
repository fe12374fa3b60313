//! Ordered map over independent jobs.
//!
//! With the `parallel` feature the work runs on a rayon pool of the requested
//! size; without it (or with `jobs == 1`) it runs on the calling thread.
//! Either way the output order matches the input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether this build can run jobs concurrently.
pub const PARALLEL_ENABLED: bool = cfg!(feature = "parallel");

/// `jobs == 0` means one worker per available core.
pub fn map_ordered<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if jobs != 1 && items.len() > 1 {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build();
            if let Ok(pool) = pool {
                return pool.install(|| items.par_iter().map(&f).collect());
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..100).collect();
        let seq = map_ordered(&items, 1, |x| x * x);
        let par = map_ordered(&items, 4, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }
}

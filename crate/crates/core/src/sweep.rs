//! Deterministic parallel sweep helpers.
//!
//! Results are collected in input order and reduced single-threaded, so the
//! output (including float summation order) is independent of the worker
//! count.

use rayon::prelude::*;

use crate::{Error, Result};

/// Parallel map preserving input order. `threads = 0` uses the rayon default.
pub fn par_map_ordered<T, R, F>(items: &[T], threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    if threads == 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let run = |pool: Option<&rayon::ThreadPool>| -> Result<Vec<R>> {
        let work = || items.par_iter().map(&f).collect::<Result<Vec<R>>>();
        match pool {
            Some(p) => p.install(work),
            None => work(),
        }
    };
    if threads == 0 {
        run(None)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
        run(Some(&pool))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_across_thread_counts() {
        let items: Vec<u64> = (0..257).collect();
        let f = |x: &u64| -> Result<f64> { Ok((*x as f64).sin() * 1e3) };
        let serial = par_map_ordered(&items, 1, f).unwrap();
        for threads in [0usize, 2, 3, 7] {
            let parallel = par_map_ordered(&items, threads, f).unwrap();
            assert_eq!(serial.len(), parallel.len());
            for (a, b) in serial.iter().zip(parallel.iter()) {
                assert!(a.to_bits() == b.to_bits(), "bitwise mismatch");
            }
        }
    }

    #[test]
    fn errors_propagate() {
        let items = vec![1u32, 2, 3];
        let res = par_map_ordered(&items, 2, |x| {
            if *x == 2 {
                Err(Error::Numerical("boom".into()))
            } else {
                Ok(*x)
            }
        });
        assert!(res.is_err());
    }
}

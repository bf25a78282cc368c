//! Execution policy for embarrassingly parallel sweeps.
//!
//! Every sweep in the crate funnels through [`map_cells`], so the choice
//! between the rayon pool and a plain loop is made in one place. Results
//! always come back in input order, which keeps downstream reductions and
//! file output deterministic regardless of the worker count.

use serde::{Deserialize, Serialize};

/// How independent work items are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    /// Evaluate items one after another on the calling thread.
    Sequential,
    /// Evaluate items on the rayon pool when the `parallel` feature is on.
    #[default]
    Parallel,
}

impl ExecMode {
    /// Whether this build can actually run items concurrently.
    pub fn is_concurrent(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Apply `f` to every item, preserving order.
pub fn map_cells<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode == ExecMode::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Run `op` with at most `workers` threads.
///
/// Without the `parallel` feature the closure simply runs inline.
pub fn with_workers<R: Send>(workers: usize, op: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if workers > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                return pool.install(op);
            }
        }
    }
    let _ = workers;
    op()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_in_both_modes() {
        let items: Vec<u64> = (0..257).collect();
        let seq = map_cells(ExecMode::Sequential, &items, |x| x * x + 1);
        let par = map_cells(ExecMode::Parallel, &items, |x| x * x + 1);
        assert_eq!(seq, par);
        assert_eq!(seq[256], 256 * 256 + 1);
    }

    #[test]
    fn worker_pool_runs_closure() {
        let v = with_workers(2, || map_cells(ExecMode::Parallel, &[1, 2, 3], |x| x * 2));
        assert_eq!(v, vec![2, 4, 6]);
    }
}

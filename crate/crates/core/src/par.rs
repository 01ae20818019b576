//! Execution mode switch for the data-parallel inner loops.
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] fans work
//! out over rayon's global pool. Without it, every call degrades to the
//! sequential path. Both paths produce identical results: reductions used by
//! the crate are associative with a total tie-break, and per-item work never
//! depends on thread placement.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items the parallel path is not worth the scheduling cost.
pub const PARALLEL_CUTOFF: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Whether this mode will actually run on more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Map every item and fold the results with `reduce`.
    ///
    /// `reduce` must be associative and commutative for the result to be
    /// independent of the split.
    pub fn map_reduce<T, R, M, F>(self, items: &[T], map: M, reduce: F) -> Option<R>
    where
        T: Sync,
        R: Send,
        M: Fn(&T) -> Option<R> + Sync + Send,
        F: Fn(R, R) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            if self == Exec::Parallel && items.len() >= PARALLEL_CUTOFF {
                return items.par_iter().filter_map(&map).reduce_with(&reduce);
            }
        }
        items.iter().filter_map(map).reduce(reduce)
    }

    /// [`Exec::map_reduce`] over the indices `0..len`.
    pub fn map_reduce_range<R, M, F>(self, len: usize, map: M, reduce: F) -> Option<R>
    where
        R: Send,
        M: Fn(usize) -> Option<R> + Sync + Send,
        F: Fn(R, R) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            if self == Exec::Parallel && len >= PARALLEL_CUTOFF {
                return (0..len)
                    .into_par_iter()
                    .filter_map(&map)
                    .reduce_with(&reduce);
            }
        }
        (0..len).filter_map(map).reduce(reduce)
    }

    /// Order-preserving map.
    pub fn map<T, R, M>(self, items: &[T], map: M) -> Vec<R>
    where
        T: Sync,
        R: Send,
        M: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            if self == Exec::Parallel && items.len() > 1 {
                return items.par_iter().map(map).collect();
            }
        }
        items.iter().map(map).collect()
    }
}

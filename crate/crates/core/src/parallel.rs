//! Index-ordered parallel map with a sequential fallback.
//!
//! With the `parallel` feature the work is spread over the current rayon
//! pool; without it (or with [`Parallelism::Sequential`]) it runs in a plain
//! loop. Results come back in index order either way, so any reduction done
//! by the caller sees identical input.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

pub fn map_indexed<T, F>(n: usize, mode: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..n).map(f).collect()
}

pub fn map_slice<S, T, F>(items: &[S], mode: Parallelism, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(items.len(), mode, |i| f(&items[i]))
}

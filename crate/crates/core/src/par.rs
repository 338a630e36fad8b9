//! Data-parallel helpers. With the `parallel` feature the work is spread over the
//! rayon pool; without it (or with [`Parallelism::Sequential`]) the same closures run
//! in order on the calling thread. Results are identical in both modes because every
//! task is a pure function of its index.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// Whether work will actually be distributed.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_indexed<T, F>(mode: Parallelism, n: usize, f: F) -> Vec<T>
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

/// Fill `out[i] = f(i)`, possibly in parallel.
pub fn fill_indexed<T, F>(mode: Parallelism, out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode.is_parallel() {
            use rayon::prelude::*;
            out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
            return;
        }
    }
    let _ = mode;
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

/// Number of worker threads the current mode will use.
pub fn worker_count(mode: Parallelism) -> usize {
    #[cfg(feature = "parallel")]
    {
        if mode.is_parallel() {
            return rayon::current_num_threads();
        }
    }
    let _ = mode;
    1
}

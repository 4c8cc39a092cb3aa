//! Execution mode switch. With the `parallel` feature, [`ExecMode::Parallel`]
//! fans independent work out over the rayon pool; without it every mode runs
//! sequentially. Results are identical either way.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    #[default]
    Sequential,
    Parallel,
}

impl ExecMode {
    /// Whether this build can actually run work concurrently in this mode.
    pub fn is_concurrent(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Order-preserving map.
pub(crate) fn map_vec<T, R, F>(mode: ExecMode, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode == ExecMode::Parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = mode;
    items.into_iter().map(f).collect()
}

/// Number of independent jobs to keep in flight at once.
pub(crate) fn chunk_width(mode: ExecMode) -> usize {
    #[cfg(feature = "parallel")]
    if mode.is_concurrent() {
        return rayon::current_num_threads().max(1);
    }
    let _ = mode;
    1
}

//! Read-only hooks into the recursion, used by validation passes and by the
//! distributed simulation. All methods default to doing nothing.

use crate::graph::{Digraph, Vertex};
use crate::labels::LabelTable;

/// Token-level record of one subproblem's local step.
#[derive(Clone, Debug, Default)]
pub struct LocalEvents {
    /// Subproblem leader (its minimum top-level id).
    pub leader: Vertex,
    /// Elected shortcutters, top-level ids.
    pub elected: Vec<Vertex>,
    /// `(distance, vertex)` for every vertex reached by a search at distance
    /// at least one, summed over all searches of the subproblem.
    pub visits: Vec<(u32, Vertex)>,
    /// `(vertex, count)` of labels, fringe memberships and shortcuts that each
    /// vertex learns or produces at the end of the step.
    pub results: Vec<(Vertex, u64)>,
}

/// One subproblem after its local step.
pub struct SubproblemView<'a> {
    pub r: u32,
    pub r_fringe: u32,
    /// Logical depth at which the subproblem started.
    pub start: u64,
    /// Logical depth charged for the local step.
    pub local_cost: u64,
    /// Largest BFS level count over the subproblem's searches.
    pub bfs_levels: u32,
    pub graph: &'a Digraph,
    /// Top-level id of each local vertex.
    pub ids: &'a [Vertex],
    /// Local ids of the chosen shortcutters, ascending.
    pub shortcutters: &'a [Vertex],
    /// Search multiplier and scale; `None` for unlimited searches.
    pub kappa: Option<u64>,
    pub search_scale: Option<u64>,
    /// Labels over local ids after the searches.
    pub labels: &'a LabelTable,
    /// Partition cells (local ids) of the surviving vertices.
    pub cells: &'a [Vec<Vertex>],
    pub events: Option<&'a LocalEvents>,
}

/// A fringe ring about to be recursed on.
pub struct RingView<'a> {
    pub r: u32,
    /// `r_fringe` of the subproblem that owns the ring.
    pub r_fringe: u32,
    /// Top-level id of the shortcutter that owns the ring.
    pub owner: Vertex,
    /// Local ids (in `graph`) of the ring members, ascending.
    pub members: &'a [Vertex],
    pub graph: &'a Digraph,
    pub ids: &'a [Vertex],
    /// Local id of the owner in `graph`.
    pub owner_local: Vertex,
    /// `(κ-1)D` and `(κ+1)D`.
    pub inner_radius: u64,
    pub outer_radius: u64,
}

pub trait Observer: Sync {
    fn subproblem(&self, _view: &SubproblemView<'_>) {}

    fn fringe_ring(&self, _view: &RingView<'_>) {}

    /// Whether [`SubproblemView::events`] should be populated.
    fn wants_events(&self) -> bool {
        false
    }
}

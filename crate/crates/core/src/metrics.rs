//! Counters reported by the shortcut algorithms.

use serde::{Deserialize, Serialize};

use crate::engine::Tally;

/// Total vertices across all subproblems at one `(r, r_fringe)` position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSize {
    pub r: u32,
    pub r_fringe: u32,
    pub vertices: u64,
}

fn level_sizes(t: &Tally) -> Vec<LevelSize> {
    t.level_sizes
        .iter()
        .map(|(&(r, r_fringe), &vertices)| LevelSize { r, r_fringe, vertices })
        .collect()
}

/// Work counters of the sequential algorithm.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkMetrics {
    pub edge_scans: u64,
    pub label_assignments: u64,
    pub comparisons: u64,
    /// Distinct shortcut edges in the returned set.
    pub shortcuts_added: u64,
    /// Shortcut edges emitted before deduplication (self-loops excluded).
    pub shortcut_insertions: u64,
    pub max_r_reached: u32,
    pub max_labels_per_vertex: u64,
    pub subproblems: u64,
    pub level_sizes: Vec<LevelSize>,
}

impl WorkMetrics {
    pub(crate) fn from_tally(t: &Tally, shortcuts_added: usize) -> Self {
        WorkMetrics {
            edge_scans: t.edge_scans,
            label_assignments: t.label_assignments,
            comparisons: t.comparisons,
            shortcuts_added: shortcuts_added as u64,
            shortcut_insertions: t.insertions,
            max_r_reached: t.max_r,
            max_labels_per_vertex: t.max_labels,
            subproblems: t.subproblems,
            level_sizes: level_sizes(t),
        }
    }
}

/// Work and logical depth of the distance-limited algorithm.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthMetrics {
    pub logical_depth: u64,
    /// `edge_scans + label_assignments + comparisons`, plus the budget of
    /// every aborted run.
    pub work: u64,
    pub edge_scans: u64,
    pub label_assignments: u64,
    pub comparisons: u64,
    /// Distinct shortcut edges in the returned set.
    pub shortcuts_added: u64,
    pub shortcut_insertions: u64,
    pub fringe_vertex_visits: u64,
    /// Nonempty fringe rings formed, including those past the cap.
    pub fringe_rings: u64,
    pub fringe_overflow: u64,
    pub max_r_reached: u32,
    pub max_r_fringe: u32,
    pub max_labels_per_vertex: u64,
    pub subproblems: u64,
    pub kappa_degenerate: u64,
    pub level_sizes: Vec<LevelSize>,
    /// Runs of the inner algorithm that completed or aborted.
    pub runs: u64,
    pub aborted_runs: u64,
    /// Outer iterations skipped because the graph was already transitively
    /// closed, so no later run could add an edge.
    pub skipped_outer_iterations: u64,
}

impl DepthMetrics {
    pub(crate) fn from_tally(t: &Tally, depth: u64, shortcuts_added: usize) -> Self {
        DepthMetrics {
            logical_depth: depth,
            work: t.work(),
            edge_scans: t.edge_scans,
            label_assignments: t.label_assignments,
            comparisons: t.comparisons,
            shortcuts_added: shortcuts_added as u64,
            shortcut_insertions: t.insertions,
            fringe_vertex_visits: t.fringe_vertex_visits,
            fringe_rings: t.fringe_rings,
            fringe_overflow: t.fringe_overflow,
            max_r_reached: t.max_r,
            max_r_fringe: t.max_r_fringe,
            max_labels_per_vertex: t.max_labels,
            subproblems: t.subproblems,
            kappa_degenerate: t.kappa_degenerate,
            level_sizes: level_sizes(t),
            runs: 1,
            aborted_runs: 0,
            skipped_outer_iterations: 0,
        }
    }

    /// Total vertices over subproblems at `(r, r_fringe)`.
    pub fn level_size(&self, r: u32, r_fringe: u32) -> u64 {
        self.level_sizes
            .iter()
            .find(|l| l.r == r && l.r_fringe == r_fringe)
            .map_or(0, |l| l.vertices)
    }
}

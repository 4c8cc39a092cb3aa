//! Observers that re-derive recursion invariants from scratch while an
//! algorithm runs. Slow; meant for small graphs.

use std::collections::HashSet;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::graph::{bfs_limited, Direction, Traversal, Vertex};
use crate::observe::{Observer, RingView, SubproblemView};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub subproblems: u64,
    pub rings_checked: u64,
    pub nonempty_rings: u64,
    /// Rings whose members differ from the recomputed set difference.
    pub ring_violations: u64,
    /// Subproblems whose cells are not exactly the label classes of the
    /// surviving vertices.
    pub partition_violations: u64,
    /// `(subproblem, vertex)` pairs checked for related-set decay.
    pub decay_pairs: u64,
    /// Pairs whose ancestor or descendant set exceeds `n_top k^-r`.
    pub decay_violations: u64,
    /// Largest number of labels on one vertex in one subproblem.
    pub max_labels: u64,
}

impl ValidationReport {
    pub fn decay_violation_rate(&self) -> f64 {
        if self.decay_pairs == 0 {
            0.0
        } else {
            self.decay_violations as f64 / self.decay_pairs as f64
        }
    }

    pub fn merge(&mut self, o: &ValidationReport) {
        self.subproblems += o.subproblems;
        self.rings_checked += o.rings_checked;
        self.nonempty_rings += o.nonempty_rings;
        self.ring_violations += o.ring_violations;
        self.partition_violations += o.partition_violations;
        self.decay_pairs += o.decay_pairs;
        self.decay_violations += o.decay_violations;
        self.max_labels = self.max_labels.max(o.max_labels);
    }
}

/// Checks fringe rings, partitions, label counts and, when `decay` is set,
/// related-set sizes against `n_top k^-r`.
pub struct Validator {
    n_top: usize,
    k: u32,
    decay: bool,
    report: Mutex<ValidationReport>,
}

impl Validator {
    pub fn new(n_top: usize, k: u32, decay: bool) -> Self {
        Validator {
            n_top,
            k,
            decay,
            report: Mutex::new(ValidationReport::default()),
        }
    }

    pub fn report(&self) -> ValidationReport {
        self.report.lock().unwrap().clone()
    }
}

fn partition_ok(v: &SubproblemView<'_>) -> bool {
    let n = v.graph.vertex_count();
    let mut seen = vec![false; n];
    let mut classes = HashSet::new();
    for cell in v.cells {
        let Some(&first) = cell.first() else { return false };
        let key = v.labels.labels(first);
        if !classes.insert(format!("{key:?}")) {
            return false;
        }
        for &w in cell {
            if seen[w as usize] || v.labels.is_eliminated(w) || v.labels.labels(w) != key {
                return false;
            }
            seen[w as usize] = true;
        }
    }
    (0..n as Vertex).all(|w| seen[w as usize] || v.labels.is_eliminated(w))
}

impl Observer for Validator {
    fn subproblem(&self, v: &SubproblemView<'_>) {
        let mut local = ValidationReport {
            subproblems: 1,
            max_labels: v.labels.max_label_count() as u64,
            ..ValidationReport::default()
        };
        if !partition_ok(v) {
            local.partition_violations += 1;
        }
        if self.decay {
            let n = v.graph.vertex_count();
            let bound = self.n_top as f64 / (self.k as f64).powi(v.r as i32);
            let mut t = Traversal::new(n);
            for w in 0..n as Vertex {
                t.run(v.graph, w, Direction::Forward, None);
                let des = t.visited().len();
                t.run(v.graph, w, Direction::Backward, None);
                let anc = t.visited().len();
                local.decay_pairs += 1;
                if des.max(anc) as f64 > bound {
                    local.decay_violations += 1;
                }
            }
        }
        self.report.lock().unwrap().merge(&local);
    }

    fn fringe_ring(&self, v: &RingView<'_>) {
        let f_out = bfs_limited(v.graph, v.owner_local, Direction::Forward, Some(v.outer_radius));
        let b_out = bfs_limited(v.graph, v.owner_local, Direction::Backward, Some(v.outer_radius));
        let f_in = bfs_limited(v.graph, v.owner_local, Direction::Forward, Some(v.inner_radius));
        let b_in = bfs_limited(v.graph, v.owner_local, Direction::Backward, Some(v.inner_radius));
        let mut expect: Vec<Vertex> = (0..v.graph.vertex_count() as Vertex)
            .filter(|&w| {
                (f_out.get(w).is_some() || b_out.get(w).is_some()) && f_in.get(w).is_none() && b_in.get(w).is_none()
            })
            .collect();
        expect.sort_unstable();
        let disjoint = v.members.iter().all(|&w| f_in.get(w).is_none() && b_in.get(w).is_none());
        let mut r = self.report.lock().unwrap();
        r.rings_checked += 1;
        r.nonempty_rings += !v.members.is_empty() as u64;
        if !disjoint || expect != v.members {
            r.ring_violations += 1;
        }
    }
}

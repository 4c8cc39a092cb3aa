//! Recursive driver shared by the sequential and the distance-limited
//! algorithms: sample shortcutters, search, shortcut, label, partition,
//! recurse on cells (and, when searches are limited, on fringe rings).

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rand::Rng;

use crate::exec::{map_vec, ExecMode};
use crate::graph::{log2n, Digraph, Direction, Traversal, Vertex};
use crate::labels::{partition_cells, Label, LabelTable};
use crate::observe::{LocalEvents, Observer, RingView, SubproblemView};
use crate::parallel::{draw_kappa, KappaRule};
use crate::rng::{cell_seed, derive_seed, rng, tag};
use crate::shortcut::{pack, Anchor};

/// Depth charged per subproblem for its constant number of pseudocode line
/// groups (sample, search, label, partition).
pub(crate) const LINE_GROUP_COST: u64 = 4;

pub(crate) fn ceil_log2(n: usize) -> u64 {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as u64
    }
}

/// Sampling probability `min(1, c * k^(r+1) * log2(n) / n)`.
pub(crate) fn sample_probability(c: f64, n_top: usize, k: u32, r: u32) -> f64 {
    if n_top == 0 {
        return 1.0;
    }
    let p = c * (k as f64).powi(r as i32 + 1) * log2n(n_top) / n_top as f64;
    p.clamp(0.0, 1.0)
}

/// Largest recursion level that is executed: `ceil(log_k n) + 1`.
pub(crate) fn level_cap(n_top: usize, k: u32) -> u32 {
    if n_top <= 1 {
        return 1;
    }
    // Integer search for the smallest e with k^e >= n, avoiding float error.
    let mut e = 0u32;
    let mut pow = 1u128;
    while pow < n_top as u128 {
        pow *= k as u128;
        e += 1;
    }
    e + 1
}

/// Work and shortcut ceilings for one run. Once either running total exceeds
/// its ceiling every branch of the run stops; whether that happens depends
/// only on the totals of the full run, never on scheduling.
#[derive(Debug)]
pub struct Budget {
    work_limit: u64,
    shortcut_limit: u64,
    work: AtomicU64,
    shortcuts: AtomicU64,
    tripped: AtomicBool,
}

impl Budget {
    pub fn new(work_limit: u64, shortcut_limit: u64) -> Self {
        Budget {
            work_limit,
            shortcut_limit,
            work: AtomicU64::new(0),
            shortcuts: AtomicU64::new(0),
            tripped: AtomicBool::new(false),
        }
    }

    fn charge(&self, work: u64, shortcuts: u64) -> bool {
        let w = self.work.fetch_add(work, Ordering::Relaxed) + work;
        let s = self.shortcuts.fetch_add(shortcuts, Ordering::Relaxed) + shortcuts;
        if w > self.work_limit || s > self.shortcut_limit {
            self.tripped.store(true, Ordering::Relaxed);
            return false;
        }
        !self.tripped()
    }

    pub fn tripped(&self) -> bool {
        self.tripped.load(Ordering::Relaxed)
    }

    pub fn work_limit(&self) -> u64 {
        self.work_limit
    }

    pub fn shortcut_limit(&self) -> u64 {
        self.shortcut_limit
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct SearchRule {
    pub d: u64,
    pub kappa: KappaRule,
}

pub(crate) struct EngineCfg<'a> {
    pub n_top: usize,
    pub k: u32,
    /// Leading constant of the sampling probability.
    pub p_const: f64,
    /// `None` runs unlimited searches and never forms fringe rings.
    pub search: Option<SearchRule>,
    pub r_max: u32,
    pub r_fringe_max: u32,
    pub exec: ExecMode,
    pub observer: Option<&'a dyn Observer>,
    pub budget: Option<&'a Budget>,
}

/// Counters accumulated over a subproblem tree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Tally {
    pub edge_scans: u64,
    pub label_assignments: u64,
    pub comparisons: u64,
    pub insertions: u64,
    pub subproblems: u64,
    pub max_r: u32,
    pub max_r_fringe: u32,
    pub max_labels: u64,
    pub fringe_vertex_visits: u64,
    pub fringe_rings: u64,
    pub fringe_overflow: u64,
    pub kappa_degenerate: u64,
    pub level_sizes: BTreeMap<(u32, u32), u64>,
}

impl Tally {
    pub fn merge(&mut self, o: &Tally) {
        self.edge_scans += o.edge_scans;
        self.label_assignments += o.label_assignments;
        self.comparisons += o.comparisons;
        self.insertions += o.insertions;
        self.subproblems += o.subproblems;
        self.max_r = self.max_r.max(o.max_r);
        self.max_r_fringe = self.max_r_fringe.max(o.max_r_fringe);
        self.max_labels = self.max_labels.max(o.max_labels);
        self.fringe_vertex_visits += o.fringe_vertex_visits;
        self.fringe_rings += o.fringe_rings;
        self.fringe_overflow += o.fringe_overflow;
        self.kappa_degenerate += o.kappa_degenerate;
        for (key, v) in &o.level_sizes {
            *self.level_sizes.entry(*key).or_insert(0) += v;
        }
    }

    pub fn work(&self) -> u64 {
        self.edge_scans + self.label_assignments + self.comparisons
    }
}

pub(crate) struct SubOut {
    pub raw: Vec<u64>,
    pub tally: Tally,
    pub depth: u64,
}

/// Search radii of one subproblem. `None` means unlimited.
#[derive(Clone, Copy, Debug)]
struct Radii {
    outer: Option<u64>,
    label: Option<u64>,
    /// Inner radius of fringe rings; `None` when no ring can be nonempty.
    inner: Option<u64>,
}

#[inline]
fn within(d: Option<u32>, limit: Option<u64>) -> bool {
    match (d, limit) {
        (Some(d), Some(l)) => d as u64 <= l,
        (Some(_), None) => true,
        (None, _) => false,
    }
}

pub(crate) struct LocalStep {
    pub raw: Vec<u64>,
    pub labels: LabelTable,
    pub rings: Vec<(Vertex, Vec<Vertex>)>,
    pub max_levels: u32,
    pub edge_scans: u64,
    pub insertions: u64,
    pub events: Option<LocalEvents>,
}

/// One round of searches from the shortcutters `s` (local ids, ascending).
/// Returns `None` if the budget trips.
#[allow(clippy::too_many_arguments)]
fn local_step(
    g: &Digraph,
    ids: &[Vertex],
    s: &[Vertex],
    radii: Radii,
    r: u32,
    budget: Option<&Budget>,
    want_events: bool,
) -> Option<LocalStep> {
    let n = g.vertex_count();
    let mut fwd = Traversal::new(n);
    let mut bwd = Traversal::new(n);
    let mut raw = Vec::new();
    let mut labels = LabelTable::new(n);
    let mut rings = Vec::new();
    let mut max_levels = 0;
    let mut insertions = 0u64;
    let mut events = want_events.then(|| LocalEvents {
        leader: ids.first().copied().unwrap_or(0),
        elected: s.iter().map(|&v| ids[v as usize]).collect(),
        ..LocalEvents::default()
    });
    let mut results = if want_events { vec![0u64; n] } else { Vec::new() };

    for &v in s {
        let scans_before = fwd.edge_scans + bwd.edge_scans;
        let labels_before = labels.assignments();
        let ins_before = insertions;
        let top_v = ids[v as usize];
        fwd.run(g, v, Direction::Forward, radii.outer);
        bwd.run(g, v, Direction::Backward, radii.outer);
        max_levels = max_levels.max(fwd.levels()).max(bwd.levels());

        for &w in fwd.visited() {
            if w != v {
                raw.push(pack(top_v, ids[w as usize], r, Anchor::Source));
                insertions += 1;
            }
            if within(fwd.distance(w), radii.label) {
                let label = if within(bwd.distance(w), radii.label) {
                    Label::eliminated(top_v)
                } else {
                    Label::des(top_v)
                };
                labels.push_ordered(w, label);
                if want_events {
                    results[w as usize] += 1;
                }
            }
        }
        for &w in bwd.visited() {
            if w != v {
                raw.push(pack(ids[w as usize], top_v, r, Anchor::Target));
                insertions += 1;
            }
            if within(bwd.distance(w), radii.label) && !within(fwd.distance(w), radii.label) {
                labels.push_ordered(w, Label::anc(top_v));
                if want_events {
                    results[w as usize] += 1;
                }
            }
        }
        if let Some(inner) = radii.inner {
            let outside = |d: Option<u32>| d.is_none_or(|d| d as u64 > inner);
            let mut members: Vec<Vertex> = fwd
                .visited()
                .iter()
                .copied()
                .filter(|&w| outside(fwd.distance(w)) && outside(bwd.distance(w)))
                .chain(
                    bwd.visited()
                        .iter()
                        .copied()
                        .filter(|&w| fwd.distance(w).is_none() && outside(bwd.distance(w))),
                )
                .collect();
            if !members.is_empty() {
                members.sort_unstable();
                if want_events {
                    for &w in &members {
                        results[w as usize] += 1;
                    }
                }
                rings.push((v, members));
            }
        }
        if let Some(ev) = events.as_mut() {
            for (t, order) in [(&fwd, fwd.visited()), (&bwd, bwd.visited())] {
                for &w in order {
                    if w != v {
                        ev.visits.push((t.distance(w).unwrap_or(0), ids[w as usize]));
                    }
                }
            }
            results[v as usize] += insertions - ins_before;
        }
        if let Some(b) = budget {
            let work = fwd.edge_scans + bwd.edge_scans - scans_before + labels.assignments() - labels_before;
            if !b.charge(work, insertions - ins_before) {
                return None;
            }
        }
    }
    if let Some(ev) = events.as_mut() {
        ev.results = results
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| (ids[v], c))
            .collect();
    }
    Some(LocalStep {
        raw,
        labels,
        rings,
        max_levels,
        edge_scans: fwd.edge_scans + bwd.edge_scans,
        insertions,
        events,
    })
}

/// Shortcutter sample over local vertices `0..n`, ascending.
pub(crate) fn sample_local<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<Vertex> {
    (0..n as Vertex).filter(|_| rng.gen::<f64>() < p).collect()
}

enum Child {
    Ring(Vec<Vertex>, u64),
    Cell(Vec<Vertex>, u64),
}

/// Solves one subproblem and everything below it. Returns `None` when the
/// budget trips.
#[allow(clippy::too_many_arguments)]
pub(crate) fn solve(
    cfg: &EngineCfg<'_>,
    g: &Digraph,
    ids: &[Vertex],
    r: u32,
    r_fringe: u32,
    seed: u64,
    start: u64,
    forced: &[Vertex],
) -> Option<SubOut> {
    if cfg.budget.is_some_and(|b| b.tripped()) {
        return None;
    }
    let n = g.vertex_count();
    let mut tally = Tally {
        subproblems: 1,
        max_r: r,
        max_r_fringe: r_fringe,
        ..Tally::default()
    };
    tally.level_sizes.insert((r, r_fringe), n as u64);

    let mut rng = rng(seed);
    // The leader draws the search multiplier before shortcutters are elected.
    let (kappa, radii) = match cfg.search {
        None => (
            None,
            Radii {
                outer: None,
                label: None,
                inner: None,
            },
        ),
        Some(rule) => {
            let (kappa, degenerate) = draw_kappa(rule.kappa, cfg.n_top, cfg.k, r, &mut rng);
            tally.kappa_degenerate += degenerate as u64;
            let scale = |m: u64| -> Option<u64> {
                let x = (m as u128) * (rule.d as u128);
                // Distances inside the subproblem never exceed n - 1.
                (x < n as u128).then_some(x as u64)
            };
            let inner = kappa.saturating_sub(1);
            let inner_r = (inner as u128) * (rule.d as u128);
            let radii = Radii {
                outer: scale(kappa.saturating_add(1)),
                label: scale(kappa),
                inner: (inner_r + 1 < n as u128).then_some(inner_r as u64),
            };
            (Some(kappa), radii)
        }
    };

    let p = sample_probability(cfg.p_const, cfg.n_top, cfg.k, r);
    let mut s = sample_local(n, p, &mut rng);
    if !forced.is_empty() {
        s.extend_from_slice(forced);
        s.sort_unstable();
        s.dedup();
    }

    let want_events = cfg.observer.is_some_and(|o| o.wants_events());
    let step = local_step(g, ids, &s, radii, r, cfg.budget, want_events)?;
    tally.edge_scans = step.edge_scans;
    tally.insertions = step.insertions;
    tally.label_assignments = step.labels.assignments();
    let max_labels = step.labels.max_label_count() as u64;
    tally.max_labels = max_labels;
    let mut comparisons = 0;
    let cells = partition_cells(&step.labels, &mut comparisons);
    tally.comparisons = comparisons;
    if let Some(b) = cfg.budget {
        if !b.charge(comparisons, 0) {
            return None;
        }
    }
    let LocalStep {
        raw,
        labels,
        rings,
        max_levels,
        events,
        ..
    } = step;

    let local_cost = max_levels as u64 + ceil_log2(n) * max_labels + LINE_GROUP_COST;
    if let Some(obs) = cfg.observer {
        obs.subproblem(&SubproblemView {
            r,
            r_fringe,
            start,
            local_cost,
            bfs_levels: max_levels,
            graph: g,
            ids,
            shortcutters: &s,
            kappa,
            search_scale: cfg.search.map(|rule| rule.d),
            labels: &labels,
            cells: &cells,
            events: events.as_ref(),
        });
    }
    drop(events);
    drop(labels);

    let mut children = Vec::new();
    if let (Some(rule), Some(kappa)) = (cfg.search, kappa) {
        for (i, (owner, members)) in rings.into_iter().enumerate() {
            if let Some(obs) = cfg.observer {
                obs.fringe_ring(&RingView {
                    r,
                    r_fringe,
                    owner: ids[owner as usize],
                    members: &members,
                    graph: g,
                    ids,
                    owner_local: owner,
                    inner_radius: kappa.saturating_sub(1).saturating_mul(rule.d),
                    outer_radius: kappa.saturating_add(1).saturating_mul(rule.d),
                });
            }
            tally.fringe_rings += 1;
            if r_fringe + 1 > cfg.r_fringe_max {
                tally.fringe_overflow += 1;
                continue;
            }
            tally.fringe_vertex_visits += members.len() as u64;
            children.push(Child::Ring(members, derive_seed(seed, tag::FRINGE, i as u64)));
        }
    }
    if r < cfg.r_max {
        for (i, cell) in cells.into_iter().enumerate() {
            children.push(Child::Cell(cell, cell_seed(seed, i, r + 1)));
        }
    }

    let child_start = start + local_cost;
    let outs = map_vec(cfg.exec, children, |child| {
        let (members, rr, rf, cseed) = match child {
            Child::Ring(m, sd) => (m, r, r_fringe + 1, sd),
            Child::Cell(m, sd) => (m, r + 1, 0, sd),
        };
        let sub = g.induced(&members);
        let sub_ids: Vec<Vertex> = members.iter().map(|&l| ids[l as usize]).collect();
        drop(members);
        solve(cfg, &sub, &sub_ids, rr, rf, cseed, child_start, &[])
    });

    let mut raw = raw;
    let mut child_depth = 0;
    for out in outs {
        let out = out?;
        raw.extend_from_slice(&out.raw);
        tally.merge(&out.tally);
        child_depth = child_depth.max(out.depth);
    }
    Some(SubOut {
        raw,
        tally,
        depth: local_cost + child_depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_cap_values() {
        assert_eq!(level_cap(1, 2), 1);
        assert_eq!(level_cap(8, 2), 4);
        assert_eq!(level_cap(9, 2), 5);
        assert_eq!(level_cap(4096, 8), 5);
        assert_eq!(level_cap(4097, 8), 6);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(8), 3);
    }

    #[test]
    fn probability_formula() {
        let p = sample_probability(20.0, 1024, 4, 0);
        assert!((p - 0.78125).abs() < 1e-12);
        assert_eq!(sample_probability(20.0, 1024, 4, 1), 1.0);
        assert_eq!(sample_probability(10.0, 1, 2, 0), 0.0);
    }

    #[test]
    fn budget_trips_on_totals() {
        let b = Budget::new(10, 100);
        assert!(b.charge(6, 1));
        assert!(!b.charge(6, 1));
        assert!(b.tripped());
        let b = Budget::new(100, 2);
        assert!(!b.charge(0, 3));
    }
}

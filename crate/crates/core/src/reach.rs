//! Single-source reachability by shortcutting then searching, and sampled
//! diameter estimates.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::graph::{log2n, Digraph, Direction, Traversal, Vertex, VertexSet};
use crate::metrics::DepthMetrics;
use crate::parallel::{parallel_diam_with, DiamConfig};
use crate::rng::{derive_seed, rng, tag};
use crate::seq::ParamError;
use crate::shortcut::ShortcutSet;

/// `max(2, ceil(log2 n))`.
pub fn default_k(n: usize) -> u32 {
    (log2n(n).ceil() as u32).max(2)
}

/// Hop distances from `src` in `G ∪ F`, without building the union graph.
/// Unreached vertices get `u32::MAX`.
pub fn union_distances(g: &Digraph, f: &ShortcutSet, src: Vertex) -> Vec<u32> {
    let n = g.vertex_count();
    let adj = f.adjacency(n);
    let mut dist = vec![u32::MAX; n];
    let mut queue = vec![src];
    dist[src as usize] = 0;
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        let du = dist[u as usize] + 1;
        for &w in g.out_neighbors(u) {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = du;
                queue.push(w);
            }
        }
        adj.for_each_target(u, |w| {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = du;
                queue.push(w);
            }
        });
    }
    dist
}

/// Distance from `u` to `v` in `G ∪ F`.
pub fn union_distance(g: &Digraph, f: &ShortcutSet, u: Vertex, v: Vertex) -> Option<u32> {
    let d = union_distances(g, f, u)[v as usize];
    (d != u32::MAX).then_some(d)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachResult {
    #[serde(skip)]
    pub reached: VertexSet,
    pub reached_count: usize,
    /// Levels of the final search over `G ∪ F`.
    pub bfs_levels: u32,
    /// Levels of the same search over `G` alone.
    pub bfs_levels_before: u32,
    pub metrics: DepthMetrics,
}

/// Runs the repeated distance-limited construction, then searches from `s`
/// in `G ∪ F`. `k = None` uses [`default_k`].
pub fn reach_with_hopset(g: &Digraph, s: Vertex, k: Option<u32>, seed: u64) -> Result<ReachResult, ParamError> {
    let k = k.unwrap_or_else(|| default_k(g.vertex_count()));
    reach_with_config(g, s, seed, &DiamConfig::new(k))
}

pub fn reach_with_config(g: &Digraph, s: Vertex, seed: u64, cfg: &DiamConfig<'_>) -> Result<ReachResult, ParamError> {
    let n = g.vertex_count();
    if s as usize >= n {
        return Err(ParamError::VertexOutOfRange { v: s, n });
    }
    let out = parallel_diam_with(g, seed, cfg)?;
    let index = HopsetIndex::from_parts(g, out.shortcuts);
    let (reached, bfs_levels) = index.search(s);
    let mut t = Traversal::new(n);
    t.run(g, s, Direction::Forward, None);
    Ok(ReachResult {
        reached_count: reached.len(),
        reached,
        bfs_levels,
        bfs_levels_before: t.levels(),
        metrics: out.metrics,
    })
}

/// A graph with its shortcut set, for answering many sources with one
/// construction.
#[derive(Clone, Debug)]
pub struct HopsetIndex {
    graph: Digraph,
    shortcuts: ShortcutSet,
}

impl HopsetIndex {
    pub fn from_parts(g: &Digraph, shortcuts: ShortcutSet) -> Self {
        HopsetIndex {
            graph: g.clone(),
            shortcuts,
        }
    }

    pub fn build(g: &Digraph, seed: u64, cfg: &DiamConfig<'_>) -> Result<(Self, DepthMetrics), ParamError> {
        let out = parallel_diam_with(g, seed, cfg)?;
        Ok((Self::from_parts(g, out.shortcuts), out.metrics))
    }

    pub fn shortcuts(&self) -> &ShortcutSet {
        &self.shortcuts
    }

    /// Vertices reachable from `s` and the number of search levels used.
    pub fn search(&self, s: Vertex) -> (VertexSet, u32) {
        let dist = union_distances(&self.graph, &self.shortcuts, s);
        let mut levels = 0;
        let reached = VertexSet::from_iter(
            dist.len(),
            dist.iter().enumerate().filter(|(_, &d)| d != u32::MAX).map(|(v, &d)| {
                levels = levels.max(d);
                v as Vertex
            }),
        );
        (reached, levels)
    }
}

/// Largest search eccentricity over `samples` distinct sources drawn
/// uniformly without replacement. A lower bound on the diameter, exact when
/// every vertex is sampled.
pub fn estimate_diameter(g: &Digraph, samples: usize, seed: u64) -> u32 {
    let n = g.vertex_count();
    if n == 0 {
        return 0;
    }
    let mut r = rng(derive_seed(seed, tag::SAMPLE, 0));
    let picks = sample(&mut r, n, samples.clamp(1, n));
    let mut t = Traversal::new(n);
    picks
        .iter()
        .map(|v| {
            t.run(g, v as Vertex, Direction::Forward, None);
            t.levels()
        })
        .max()
        .unwrap_or(0)
}

/// [`estimate_diameter`] on `G ∪ F`.
pub fn estimate_diameter_with(g: &Digraph, f: &ShortcutSet, samples: usize, seed: u64) -> u32 {
    let n = g.vertex_count();
    if n == 0 {
        return 0;
    }
    let mut r = rng(derive_seed(seed, tag::SAMPLE, 0));
    let picks = sample(&mut r, n, samples.clamp(1, n));
    picks
        .iter()
        .map(|v| {
            union_distances(g, f, v as Vertex)
                .into_iter()
                .filter(|&d| d != u32::MAX)
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

use super::{Digraph, Direction, Vertex, VertexSet};

const UNREACHED: u32 = u32::MAX;

/// Hop distances from (or to) a search source. Entries beyond the search
/// limit are reported as unreachable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistMap {
    dist: Vec<u32>,
}

impl DistMap {
    pub fn get(&self, v: Vertex) -> Option<u32> {
        match self.dist[v as usize] {
            UNREACHED => None,
            d => Some(d),
        }
    }

    /// `(vertex, distance)` pairs for every finite entry, ascending by vertex.
    pub fn reached(&self) -> impl Iterator<Item = (Vertex, u32)> + '_ {
        self.dist
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != UNREACHED)
            .map(|(v, &d)| (v as Vertex, d))
    }

    pub fn finite_set(&self) -> VertexSet {
        VertexSet::from_iter(self.dist.len(), self.reached().map(|(v, _)| v))
    }

    pub fn max_distance(&self) -> u32 {
        self.reached().map(|(_, d)| d).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }
}

/// Reusable breadth-first search state. Clearing between searches is
/// amortized through an epoch stamp, so a run costs only what it visits.
#[derive(Clone, Debug)]
pub struct Traversal {
    stamp: Vec<u32>,
    dist: Vec<u32>,
    order: Vec<Vertex>,
    epoch: u32,
    /// Edges examined over the lifetime of this traversal.
    pub edge_scans: u64,
    levels: u32,
}

impl Traversal {
    pub fn new(n: usize) -> Self {
        Traversal {
            stamp: vec![0; n],
            dist: vec![0; n],
            order: Vec::new(),
            epoch: 0,
            edge_scans: 0,
            levels: 0,
        }
    }

    fn bump(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
    }

    /// Runs a search from `src` and returns the visited vertices in BFS
    /// order. Vertices at distance exactly `limit` are reported but not
    /// expanded. `None` means unlimited.
    pub fn run(&mut self, g: &Digraph, src: Vertex, dir: Direction, limit: Option<u64>) -> &[Vertex] {
        if self.stamp.len() < g.vertex_count() {
            self.stamp.resize(g.vertex_count(), 0);
            self.dist.resize(g.vertex_count(), 0);
        }
        self.bump();
        self.order.clear();
        self.order.push(src);
        self.stamp[src as usize] = self.epoch;
        self.dist[src as usize] = 0;
        self.levels = 0;
        let limit = limit.unwrap_or(u64::MAX);
        let mut head = 0;
        while head < self.order.len() {
            let u = self.order[head];
            head += 1;
            let du = self.dist[u as usize];
            if du as u64 >= limit {
                continue;
            }
            let nbrs = g.neighbors(u, dir);
            self.edge_scans += nbrs.len() as u64;
            for &w in nbrs {
                if self.stamp[w as usize] != self.epoch {
                    self.stamp[w as usize] = self.epoch;
                    self.dist[w as usize] = du + 1;
                    self.levels = du + 1;
                    self.order.push(w);
                }
            }
        }
        &self.order
    }

    /// Distance of `v` in the most recent search, if it was reached.
    #[inline]
    pub fn distance(&self, v: Vertex) -> Option<u32> {
        (self.stamp[v as usize] == self.epoch).then(|| self.dist[v as usize])
    }

    /// Visited vertices of the most recent search, in BFS order.
    pub fn visited(&self) -> &[Vertex] {
        &self.order
    }

    /// Largest distance reached by the most recent search.
    pub fn levels(&self) -> u32 {
        self.levels
    }
}

/// Exact hop distances from `src` (forward) or to `src` (backward), keeping
/// only entries within `limit`.
pub fn bfs_limited(g: &Digraph, src: Vertex, dir: Direction, limit: Option<u64>) -> DistMap {
    let mut t = Traversal::new(g.vertex_count());
    t.run(g, src, dir, limit);
    let mut dist = vec![UNREACHED; g.vertex_count()];
    for &v in t.visited() {
        dist[v as usize] = t.dist[v as usize];
    }
    DistMap { dist }
}

/// Every vertex reachable from `s`, including `s`.
pub fn reachable_set(g: &Digraph, s: Vertex) -> VertexSet {
    let mut t = Traversal::new(g.vertex_count());
    VertexSet::from_iter(g.vertex_count(), t.run(g, s, Direction::Forward, None).iter().copied())
}

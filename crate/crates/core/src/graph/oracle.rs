//! Brute-force reference computations. These are quadratic or worse and are
//! refused above a configurable vertex cap.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use super::{Digraph, Direction, Traversal, Vertex, VertexSet};

pub const DEFAULT_ORACLE_CAP: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            cap: DEFAULT_ORACLE_CAP,
        }
    }
}

impl OracleConfig {
    fn admit(&self, n: usize) -> Result<(), OracleError> {
        if n > self.cap {
            Err(OracleError::TooLarge { n, cap: self.cap })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle refused a graph with {n} vertices (cap {cap})")]
    TooLarge { n: usize, cap: usize },
}

/// Boolean reachability matrix; entry `(u, v)` is set iff `u` reaches `v`.
#[derive(Clone, PartialEq, Eq)]
pub struct ReachMatrix {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl ReachMatrix {
    pub fn new(n: usize) -> Self {
        let stride = n.div_ceil(64);
        ReachMatrix {
            n,
            stride,
            bits: vec![0; stride * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: Vertex, v: Vertex) -> bool {
        let (u, v) = (u as usize, v as usize);
        self.bits[u * self.stride + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, u: Vertex, v: Vertex) {
        let (u, v) = (u as usize, v as usize);
        self.bits[u * self.stride + v / 64] |= 1 << (v % 64);
    }

    pub fn row(&self, u: Vertex) -> VertexSet {
        VertexSet::from_iter(self.n, (0..self.n as Vertex).filter(|&v| self.get(u, v)))
    }

    /// Boolean product of the matrix with itself.
    pub fn boolean_square(&self) -> ReachMatrix {
        let mut out = ReachMatrix::new(self.n);
        for u in 0..self.n {
            for w in 0..self.n {
                if self.get(u as Vertex, w as Vertex) {
                    let (dst, src) = (u * self.stride, w * self.stride);
                    for i in 0..self.stride {
                        out.bits[dst + i] |= self.bits[src + i];
                    }
                }
            }
        }
        out
    }

    /// Number of set entries.
    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl std::fmt::Debug for ReachMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for u in 0..self.n {
            let row: String = (0..self.n)
                .map(|v| if self.get(u as Vertex, v as Vertex) { '1' } else { '0' })
                .collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

/// Reflexive transitive closure by one search per vertex.
pub fn transitive_closure_oracle(g: &Digraph, cfg: &OracleConfig) -> Result<ReachMatrix, OracleError> {
    let n = g.vertex_count();
    cfg.admit(n)?;
    let mut m = ReachMatrix::new(n);
    let mut t = Traversal::new(n);
    for u in 0..n as Vertex {
        for &v in t.run(g, u, Direction::Forward, None) {
            m.set(u, v);
        }
    }
    Ok(m)
}

/// Longest finite shortest-path distance over ordered pairs.
pub fn exact_diameter(g: &Digraph, cfg: &OracleConfig) -> Result<u32, OracleError> {
    let n = g.vertex_count();
    cfg.admit(n)?;
    let mut t = Traversal::new(n);
    let mut best = 0;
    for u in 0..n as Vertex {
        t.run(g, u, Direction::Forward, None);
        best = best.max(t.levels());
    }
    Ok(best)
}

/// Strongly connected component ids, dense in `[0, count)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SccLabels {
    pub ids: Vec<u32>,
    pub count: usize,
}

impl SccLabels {
    pub fn same(&self, u: Vertex, v: Vertex) -> bool {
        self.ids[u as usize] == self.ids[v as usize]
    }
}

/// Component ids are numbered in reverse topological order of the
/// condensation: an edge between components always goes to a smaller id.
pub fn strongly_connected_components(g: &Digraph) -> SccLabels {
    let mut pg: DiGraph<(), (), u32> = DiGraph::with_capacity(g.vertex_count(), g.edge_count());
    for _ in 0..g.vertex_count() {
        pg.add_node(());
    }
    for (u, v) in g.edges() {
        pg.add_edge(u.into(), v.into(), ());
    }
    let comps = tarjan_scc(&pg);
    let mut ids = vec![0; g.vertex_count()];
    for (id, comp) in comps.iter().enumerate() {
        for node in comp {
            ids[node.index()] = id as u32;
        }
    }
    SccLabels {
        ids,
        count: comps.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_of_path_is_upper_triangular() {
        let g = Digraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let m = transitive_closure_oracle(&g, &OracleConfig::default()).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(m.get(u, v), u <= v);
            }
        }
    }

    #[test]
    fn closure_of_two_cycle_is_full() {
        let g = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let m = transitive_closure_oracle(&g, &OracleConfig::default()).unwrap();
        assert_eq!(m.count(), 4);
    }

    #[test]
    fn oracle_cap_refuses() {
        let g = Digraph::empty(20);
        let cfg = OracleConfig { cap: 10 };
        assert_eq!(
            transitive_closure_oracle(&g, &cfg).unwrap_err(),
            OracleError::TooLarge { n: 20, cap: 10 }
        );
        assert!(exact_diameter(&g, &cfg).is_err());
    }

    #[test]
    fn diameter_examples() {
        let cfg = OracleConfig::default();
        let p5 = Digraph::new(5, (0..4).map(|i| (i, i + 1))).unwrap();
        assert_eq!(exact_diameter(&p5, &cfg).unwrap(), 4);
        assert_eq!(exact_diameter(&Digraph::empty(1), &cfg).unwrap(), 0);
        assert_eq!(exact_diameter(&Digraph::empty(7), &cfg).unwrap(), 0);
        let shortcut = p5.with_extra_edges([(0, 4)]);
        assert_eq!(exact_diameter(&shortcut, &cfg).unwrap(), 3);
    }

    #[test]
    fn scc_examples() {
        let dag = Digraph::new(4, [(0, 1), (1, 2), (0, 3)]).unwrap();
        assert_eq!(strongly_connected_components(&dag).count, 4);
        let cyc = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let s = strongly_connected_components(&cyc);
        assert_eq!(s.count, 1);
        assert!(s.same(0, 1));
    }

    #[test]
    fn scc_ids_follow_reverse_topological_order() {
        let g = Digraph::new(6, [(0, 1), (1, 0), (1, 2), (2, 3), (3, 2), (3, 4), (5, 0)]).unwrap();
        let s = strongly_connected_components(&g);
        for (u, v) in g.edges() {
            assert!(s.ids[u as usize] >= s.ids[v as usize]);
        }
    }
}

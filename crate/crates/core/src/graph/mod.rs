//! Immutable directed graphs in CSR form, traversals and brute-force oracles.

mod closure;
mod io;
mod oracle;
mod traverse;
mod vertex_set;

pub use closure::reachable_pair_count;
pub use io::{read_edge_list, write_edge_list, ParseError};
pub use oracle::{
    exact_diameter, strongly_connected_components, transitive_closure_oracle, OracleConfig,
    OracleError, ReachMatrix, SccLabels, DEFAULT_ORACLE_CAP,
};
pub use traverse::{bfs_limited, reachable_set, DistMap, Traversal};
pub use vertex_set::VertexSet;

use thiserror::Error;

/// Vertex identifier. Graphs are indexed `0..n`.
pub type Vertex = u32;

/// Largest supported vertex count. Shortcut records pack two endpoints into
/// one machine word, which caps ids at 28 bits.
pub const MAX_VERTICES: usize = 1 << 28;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge ({u}, {v}) has an endpoint outside [0, {n})")]
    EndpointOutOfRange { u: u64, v: u64, n: usize },
    #[error("vertex count {0} exceeds the supported maximum of 2^28")]
    TooManyVertices(usize),
    #[error("vertex {v} is outside [0, {n})")]
    VertexOutOfRange { v: u64, n: usize },
    #[error("path step ({u}, {v}) is not an edge of the graph")]
    NotAPath { u: Vertex, v: Vertex },
    #[error("a path needs at least one vertex")]
    EmptyPath,
}

/// Search direction: along edges (`Forward`) or against them (`Backward`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Directed graph with forward and backward adjacency in compressed sparse
/// row layout. Neighbor lists are sorted ascending and free of duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<Vertex>,
    in_offsets: Vec<usize>,
    in_sources: Vec<Vertex>,
}

impl Digraph {
    /// Builds a graph from an arbitrary edge list. Duplicate edges collapse
    /// into one; self-loops are kept.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n > MAX_VERTICES {
            return Err(GraphError::TooManyVertices(n));
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::EndpointOutOfRange {
                    u: u as u64,
                    v: v as u64,
                    n,
                });
            }
            list.push((u as Vertex, v as Vertex));
        }
        list.sort_unstable();
        list.dedup();
        Ok(Self::from_sorted_unique(n, list.into_iter()))
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unique(n, std::iter::empty())
    }

    /// Builds from edges already sorted by `(source, target)` without
    /// repeats. Callers inside the crate uphold the ordering.
    pub(crate) fn from_sorted_unique<I>(n: usize, edges: I) -> Self
    where
        I: Iterator<Item = (Vertex, Vertex)>,
    {
        let mut out_offsets = Vec::with_capacity(n + 1);
        out_offsets.push(0);
        let mut out_targets = Vec::new();
        let mut in_degree = vec![0usize; n + 1];
        let mut current = 0usize;
        let mut last: Option<(Vertex, Vertex)> = None;
        for (u, v) in edges {
            debug_assert!(last.map_or(true, |p| p < (u, v)), "edges must be sorted and unique");
            last = Some((u, v));
            while current < u as usize {
                out_offsets.push(out_targets.len());
                current += 1;
            }
            out_targets.push(v);
            in_degree[v as usize + 1] += 1;
        }
        while out_offsets.len() < n + 1 {
            out_offsets.push(out_targets.len());
        }
        for i in 1..=n {
            in_degree[i] += in_degree[i - 1];
        }
        let in_offsets = in_degree;
        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![0 as Vertex; out_targets.len()];
        // Sources come out ascending per target because the scan is in source order.
        for u in 0..n {
            for &v in &out_targets[out_offsets[u]..out_offsets[u + 1]] {
                in_sources[cursor[v as usize]] = u as Vertex;
                cursor[v as usize] += 1;
            }
        }
        Digraph {
            n,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    #[inline]
    pub fn out_neighbors(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.out_targets[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    #[inline]
    pub fn in_neighbors(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex, dir: Direction) -> &[Vertex] {
        match dir {
            Direction::Forward => self.out_neighbors(v),
            Direction::Backward => self.in_neighbors(v),
        }
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.out_neighbors(u).binary_search(&v).is_ok()
    }

    /// All edges in `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n as Vertex).flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u, v)))
    }

    pub fn check_vertex(&self, v: usize) -> Result<Vertex, GraphError> {
        if v < self.n {
            Ok(v as Vertex)
        } else {
            Err(GraphError::VertexOutOfRange { v: v as u64, n: self.n })
        }
    }

    /// Subgraph induced by `members`, which must be sorted ascending and
    /// distinct. Local vertex `i` corresponds to `members[i]`.
    pub fn induced(&self, members: &[Vertex]) -> Digraph {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        // Dense lookup table when the members are a sizable fraction of the
        // graph, binary search otherwise.
        let dense = members.len() * 8 >= self.n;
        let local = if dense {
            let mut local = vec![Vertex::MAX; self.n];
            for (i, &g) in members.iter().enumerate() {
                local[g as usize] = i as Vertex;
            }
            local
        } else {
            Vec::new()
        };
        let lookup = |g: Vertex| -> Option<Vertex> {
            if dense {
                let l = local[g as usize];
                (l != Vertex::MAX).then_some(l)
            } else {
                members.binary_search(&g).ok().map(|i| i as Vertex)
            }
        };
        let mut edges = Vec::new();
        for (i, &g) in members.iter().enumerate() {
            for &w in self.out_neighbors(g) {
                if let Some(j) = lookup(w) {
                    edges.push((i as Vertex, j));
                }
            }
        }
        // Targets of each source are visited in ascending global order, and
        // the global-to-local map is monotone, so `edges` is already sorted.
        Digraph::from_sorted_unique(members.len(), edges.into_iter())
    }

    /// Union of this graph with extra edges; duplicates collapse.
    pub fn with_extra_edges<I>(&self, extra: I) -> Digraph
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut list: Vec<(Vertex, Vertex)> = self.edges().collect();
        list.extend(extra);
        list.sort_unstable();
        list.dedup();
        Digraph::from_sorted_unique(self.n, list.into_iter())
    }
}

/// A walk `v_0, ..., v_l` along edges of some graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    vertices: Vec<Vertex>,
}

impl Path {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::EmptyPath);
        }
        Ok(Path { vertices })
    }

    /// Checks that consecutive vertices are joined by edges of `g`.
    pub fn validate(&self, g: &Digraph) -> Result<(), GraphError> {
        for &v in &self.vertices {
            g.check_vertex(v as usize)?;
        }
        for w in self.vertices.windows(2) {
            if !g.has_edge(w[0], w[1]) {
                return Err(GraphError::NotAPath { u: w[0], v: w[1] });
            }
        }
        Ok(())
    }

    pub fn head(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn tail(&self) -> Vertex {
        *self.vertices.last().expect("non-empty path")
    }

    /// Number of edges on the path.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }
}

/// Base-2 logarithm of a vertex count as a real number.
#[inline]
pub fn log2n(n: usize) -> f64 {
    (n.max(1) as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph() {
        let g = Digraph::new(1, []).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = Digraph::new(3, [(0, 1), (1, 2), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn backward_adjacency_is_transpose() {
        let g = Digraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(g.in_neighbors(3), &[2]);
        assert_eq!(g.in_neighbors(0), &[] as &[Vertex]);
        let g = Digraph::new(5, [(4, 0), (0, 2), (3, 2), (1, 2), (2, 2)]).unwrap();
        for v in 0..5 {
            for &u in g.in_neighbors(v) {
                assert!(g.out_neighbors(u).contains(&v));
            }
        }
        assert_eq!(g.in_neighbors(2), &[0, 1, 2, 3]);
    }

    #[test]
    fn out_of_range_endpoint_is_rejected() {
        let err = Digraph::new(2, [(0, 2)]).unwrap_err();
        assert!(matches!(err, GraphError::EndpointOutOfRange { .. }));
    }

    #[test]
    fn induced_subgraph_keeps_internal_edges() {
        let g = Digraph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (4, 1)]).unwrap();
        let h = g.induced(&[1, 2, 4]);
        let edges: Vec<_> = h.edges().collect();
        assert_eq!(edges, vec![(0, 1), (2, 0)]);
    }

    #[test]
    fn path_validation() {
        let g = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let p = Path::new(vec![0, 1, 2]).unwrap();
        p.validate(&g).unwrap();
        assert_eq!((p.head(), p.tail(), p.len()), (0, 2, 2));
        let bad = Path::new(vec![0, 2]).unwrap();
        assert!(bad.validate(&g).is_err());
    }
}

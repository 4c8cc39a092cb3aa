use std::collections::VecDeque;

use crate::graph::{Digraph, Vertex};

use super::CongestError;

/// A rooted BFS spanning tree of the communication graph.
#[derive(Clone, Debug)]
pub struct SpanningTree {
    pub root: Vertex,
    /// `parent[root] == root`.
    pub parent: Vec<Vertex>,
    pub depth: Vec<u32>,
    /// Vertices in BFS order from the root.
    pub order: Vec<Vertex>,
    pub height: u32,
}

/// The synchronous message-passing network over a directed graph. Links are
/// undirected: `{u, v}` for every edge in either direction.
#[derive(Clone, Debug)]
pub struct Network {
    graph: Digraph,
    offsets: Vec<usize>,
    links: Vec<Vertex>,
    d_hop: u32,
    tree: SpanningTree,
}

fn undirected_bfs(offsets: &[usize], links: &[Vertex], src: Vertex, dist: &mut [u32], parent: Option<&mut [Vertex]>) -> Vec<Vertex> {
    dist.fill(u32::MAX);
    let mut order = vec![src];
    dist[src as usize] = 0;
    let mut parent = parent;
    if let Some(p) = parent.as_deref_mut() {
        p[src as usize] = src;
    }
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &w in &links[offsets[u as usize]..offsets[u as usize + 1]] {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[u as usize] + 1;
                if let Some(p) = parent.as_deref_mut() {
                    p[w as usize] = u;
                }
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    order
}

impl Network {
    /// Builds the network and its spanning tree rooted at vertex 0.
    /// Computing the hop diameter takes one search per vertex.
    pub fn new(g: &Digraph) -> Result<Self, CongestError> {
        let n = g.vertex_count();
        if n == 0 {
            return Err(CongestError::Empty);
        }
        let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for (u, v) in g.edges() {
            if u != v {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut links = Vec::new();
        offsets.push(0);
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
            links.extend_from_slice(a);
            offsets.push(links.len());
        }
        drop(adj);

        let mut dist = vec![0u32; n];
        let mut parent = vec![0 as Vertex; n];
        let order = undirected_bfs(&offsets, &links, 0, &mut dist, Some(&mut parent));
        if order.len() < n {
            return Err(CongestError::Disconnected {
                reached: order.len(),
                n,
            });
        }
        let depth = dist.clone();
        let height = order.iter().map(|&v| depth[v as usize]).max().unwrap_or(0);
        let mut d_hop = height;
        for v in 1..n as Vertex {
            undirected_bfs(&offsets, &links, v, &mut dist, None);
            d_hop = d_hop.max(dist.iter().copied().max().unwrap_or(0));
        }
        Ok(Network {
            graph: g.clone(),
            offsets,
            links,
            d_hop,
            tree: SpanningTree {
                root: 0,
                parent,
                depth,
                order,
                height,
            },
        })
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Undirected hop diameter.
    pub fn hop_diameter(&self) -> u32 {
        self.d_hop
    }

    pub fn tree(&self) -> &SpanningTree {
        &self.tree
    }

    /// Communication neighbors of `v`, ascending.
    pub fn links(&self, v: Vertex) -> &[Vertex] {
        &self.links[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    /// Number of directed link directions `u -> v`.
    pub fn direction_count(&self) -> usize {
        self.links.len()
    }

    /// Index of the direction `u -> v`; panics if `{u, v}` is not a link.
    pub fn direction(&self, u: Vertex, v: Vertex) -> usize {
        let lo = self.offsets[u as usize];
        match self.links(u).binary_search(&v) {
            Ok(i) => lo + i,
            Err(_) => panic!("{u} and {v} are not adjacent"),
        }
    }
}

/// Vertices weakly connected to `s`, ascending.
pub fn communication_component(g: &Digraph, s: Vertex) -> Vec<Vertex> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    seen[s as usize] = true;
    let mut stack = vec![s];
    while let Some(u) = stack.pop() {
        for &w in g.out_neighbors(u).iter().chain(g.in_neighbors(u)) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w);
            }
        }
    }
    (0..n as Vertex).filter(|&v| seen[v as usize]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_diameter_ignores_direction() {
        let g = Digraph::new(5, [(1, 0), (1, 2), (3, 2), (3, 4)]).unwrap();
        let net = Network::new(&g).unwrap();
        assert_eq!(net.hop_diameter(), 4);
        assert_eq!(net.tree().height, 4);
        assert_eq!(net.links(1), &[0, 2]);
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = Digraph::new(3, [(0, 1)]).unwrap();
        assert!(matches!(Network::new(&g), Err(CongestError::Disconnected { reached: 2, n: 3 })));
        assert_eq!(communication_component(&g, 1), vec![0, 1]);
        assert_eq!(communication_component(&g, 2), vec![2]);
    }

    #[test]
    fn star_tree() {
        let g = Digraph::new(5, (1..5).map(|i| (0, i))).unwrap();
        let net = Network::new(&g).unwrap();
        assert_eq!(net.hop_diameter(), 2);
        assert_eq!(net.tree().height, 1);
        assert!(net.tree().parent.iter().all(|&p| p == 0));
    }
}

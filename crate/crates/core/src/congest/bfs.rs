//! Hop-limited searches from every hub at once, as flooding under link
//! capacity. Each hub runs a forward and a backward search; a search is a
//! token that nodes re-forward whenever their distance to it improves.
//! Every link direction keeps one queue, served in a random priority order
//! over searches fixed per run.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};

use rand::seq::SliceRandom;

use crate::graph::{log2n, Vertex};
use crate::rng::{derive_seed, rng, tag};

use super::Network;

/// Flood constant in the asserted bound `C (|T| + h) log2 n`.
pub const LIMITED_BFS_CONSTANT: u64 = 2;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LimitedBfs {
    /// Per vertex, hubs `t` with `d(t, v) <= h`, ascending.
    pub ancestors: Vec<Vec<Vertex>>,
    /// Per vertex, hubs `t` with `d(v, t) <= h`, ascending.
    pub descendants: Vec<Vec<Vertex>>,
    pub rounds: u64,
    pub messages: u64,
}

/// `hubs` must be nonempty, ascending and distinct.
pub fn limited_bfs_all(net: &Network, hubs: &[Vertex], h: u64, seed: u64) -> LimitedBfs {
    limited_bfs_traced(net, hubs, h, seed, None).expect("no trace sink")
}

pub(crate) fn limited_bfs_traced(
    net: &Network,
    hubs: &[Vertex],
    h: u64,
    seed: u64,
    mut trace: Option<&mut dyn Write>,
) -> io::Result<LimitedBfs> {
    assert!(!hubs.is_empty(), "hub set is empty");
    let n = net.vertex_count();
    let g = net.graph();
    // Token 2i is the forward search of hubs[i], 2i + 1 the backward one.
    let tokens = 2 * hubs.len();
    let mut prio: Vec<u32> = (0..tokens as u32).collect();
    prio.shuffle(&mut rng(derive_seed(seed, tag::SCHEDULE, 0)));
    let mut by_prio = vec![0u32; tokens];
    for (t, &p) in prio.iter().enumerate() {
        by_prio[p as usize] = t as u32;
    }

    let mut known: Vec<HashMap<u32, u32>> = vec![HashMap::new(); n];
    // Per direction: priority -> distance at the sender.
    let mut queues: Vec<BTreeMap<u32, u32>> = vec![BTreeMap::new(); net.direction_count()];
    let mut active: Vec<usize> = Vec::new();

    let enqueue = |queues: &mut Vec<BTreeMap<u32, u32>>, active: &mut Vec<usize>, v: Vertex, token: u32, d: u32| {
        if d as u64 >= h {
            return;
        }
        let targets = if token % 2 == 0 { g.out_neighbors(v) } else { g.in_neighbors(v) };
        for &w in targets {
            if w == v {
                continue;
            }
            let dir = net.direction(v, w);
            let q = &mut queues[dir];
            if q.is_empty() {
                active.push(dir);
            }
            let e = q.entry(prio[token as usize]).or_insert(d);
            *e = (*e).min(d);
        }
    };

    for (i, &t) in hubs.iter().enumerate() {
        for token in [2 * i as u32, 2 * i as u32 + 1] {
            known[t as usize].insert(token, 0);
            enqueue(&mut queues, &mut active, t, token, 0);
        }
    }

    let mut dir_ends = vec![(0 as Vertex, 0 as Vertex); net.direction_count()];
    for u in 0..n as Vertex {
        for &w in net.links(u) {
            dir_ends[net.direction(u, w)] = (u, w);
        }
    }

    let mut round = 0u64;
    let mut messages = 0u64;
    while !active.is_empty() {
        round += 1;
        active.sort_unstable();
        let mut deliveries = Vec::with_capacity(active.len());
        let mut still = Vec::new();
        for &dir in &active {
            let (p, d) = queues[dir].pop_first().expect("active queue is nonempty");
            deliveries.push((dir, by_prio[p as usize], d));
            if !queues[dir].is_empty() {
                still.push(dir);
            }
        }
        active = still;
        messages += deliveries.len() as u64;
        for (dir, token, d) in deliveries {
            let (u, w) = dir_ends[dir];
            if let Some(out) = trace.as_deref_mut() {
                let kind = if token % 2 == 0 { 'f' } else { 'b' };
                writeln!(out, "round={round} phase=skeleton edge={u}-{w} token={kind}{}", hubs[token as usize / 2])?;
            }
            let nd = d + 1;
            let slot = known[w as usize].entry(token).or_insert(u32::MAX);
            if nd < *slot {
                *slot = nd;
                enqueue(&mut queues, &mut active, w, token, nd);
            }
        }
    }
    let bound = LIMITED_BFS_CONSTANT as f64 * (hubs.len() as f64 + h as f64) * log2n(n);
    assert!(
        round as f64 <= bound.max(1.0),
        "limited searches took {round} rounds, bound {bound}"
    );

    let mut ancestors = vec![Vec::new(); n];
    let mut descendants = vec![Vec::new(); n];
    for (v, k) in known.into_iter().enumerate() {
        for (token, _) in k {
            let t = hubs[token as usize / 2];
            if token % 2 == 0 {
                ancestors[v].push(t);
            } else {
                descendants[v].push(t);
            }
        }
        ancestors[v].sort_unstable();
        descendants[v].sort_unstable();
    }
    Ok(LimitedBfs {
        ancestors,
        descendants,
        rounds: round,
        messages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bfs_limited, Digraph, Direction};
    use proptest::prelude::*;

    #[test]
    fn zero_hops_learns_only_self() {
        let g = Digraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let net = Network::new(&g).unwrap();
        let out = limited_bfs_all(&net, &[1, 3], 0, 0);
        assert_eq!(out.rounds, 0);
        assert_eq!(out.ancestors, vec![vec![], vec![1], vec![], vec![3]]);
        assert_eq!(out.descendants, out.ancestors);
    }

    #[test]
    fn single_hub_on_a_dag() {
        let g = Digraph::new(6, [(0, 1), (1, 2), (3, 1), (2, 4), (5, 4)]).unwrap();
        let net = Network::new(&g).unwrap();
        let h = net.hop_diameter() as u64;
        let out = limited_bfs_all(&net, &[1], h, 3);
        let anc: Vec<usize> = (0..6).filter(|&v| out.ancestors[v] == [1]).collect();
        let des: Vec<usize> = (0..6).filter(|&v| out.descendants[v] == [1]).collect();
        assert_eq!(anc, vec![1, 2, 4]);
        assert_eq!(des, vec![0, 1, 3]);
        assert!(out.rounds as f64 <= 2.0 * (1.0 + h as f64) * log2n(6));
    }

    fn arb_connected() -> impl Strategy<Value = Digraph> {
        (2usize..30).prop_flat_map(|n| {
            (
                prop::collection::vec(any::<prop::sample::Index>(), n - 1),
                prop::collection::vec(any::<bool>(), n - 1),
                prop::collection::vec((0..n, 0..n), 0..n * 2),
            )
                .prop_map(move |(parents, flips, extra)| {
                    let mut edges: Vec<(usize, usize)> = parents
                        .iter()
                        .zip(&flips)
                        .enumerate()
                        .map(|(i, (p, &f))| {
                            let (a, b) = (p.index(i + 1), i + 1);
                            if f {
                                (b, a)
                            } else {
                                (a, b)
                            }
                        })
                        .collect();
                    edges.extend(extra);
                    Digraph::new(n, edges).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sets_match_limited_search(g in arb_connected(), mask in any::<u64>(), h in 0u64..8, seed in any::<u64>()) {
            let net = Network::new(&g).unwrap();
            let n = g.vertex_count();
            let mut hubs: Vec<Vertex> = (0..n as Vertex).filter(|&v| mask >> (v % 64) & 1 == 1).collect();
            if hubs.is_empty() {
                hubs.push(0);
            }
            let out = limited_bfs_all(&net, &hubs, h, seed);
            let mut anc = vec![Vec::new(); n];
            let mut des = vec![Vec::new(); n];
            for &t in &hubs {
                for (v, _) in bfs_limited(&g, t, Direction::Forward, Some(h)).reached() {
                    anc[v as usize].push(t);
                }
                for (v, _) in bfs_limited(&g, t, Direction::Backward, Some(h)).reached() {
                    des[v as usize].push(t);
                }
            }
            prop_assert_eq!(out.ancestors, anc);
            prop_assert_eq!(out.descendants, des);
        }
    }
}

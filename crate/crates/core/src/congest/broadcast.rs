//! All-to-all dissemination over the spanning tree: tokens are pipelined up
//! to the root, and the root streams every token back down.

use std::collections::{HashSet, VecDeque};
use std::io::{self, Write};

use crate::graph::Vertex;

use super::Network;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BroadcastOutcome {
    pub rounds: u64,
    pub messages: u64,
}

fn per_vertex_counts(net: &Network, holders: &[(Vertex, u64)]) -> (Vec<u64>, u64) {
    let mut own = vec![0u64; net.vertex_count()];
    let mut k = 0;
    for &(v, c) in holders {
        own[v as usize] += c;
        k += c;
    }
    (own, k)
}

fn check_bound(net: &Network, k: u64, rounds: u64) {
    let bound = 2 * (k + 2 * net.hop_diameter() as u64);
    assert!(rounds <= bound, "broadcast of {k} tokens took {rounds} rounds, bound {bound}");
}

/// Rounds until every node holds all `K = Σ count` tokens, where `holders`
/// lists `(vertex, count)` pairs.
///
/// Computed in closed form. A node's send times are a union of disjoint
/// rate-one intervals: merging the (shifted) intervals of its children with
/// its own tokens is a single sweep, and a node with one busy child and no
/// tokens just delays the child's stream by one round.
pub fn broadcast_all(net: &Network, holders: &[(Vertex, u64)]) -> BroadcastOutcome {
    let (own, k) = per_vertex_counts(net, holders);
    let tree = net.tree();
    if k == 0 || tree.height == 0 {
        return BroadcastOutcome::default();
    }
    let n = net.vertex_count();
    // Send intervals of each node, stored relative to a per-node shift.
    let mut pending: Vec<Vec<(Vec<(u64, u64)>, u64)>> = vec![Vec::new(); n];
    let mut root_sched = Vec::new();
    let mut up_messages = 0u64;
    for &v in tree.order.iter().rev() {
        let vi = v as usize;
        up_messages += own[vi] * tree.depth[vi] as u64;
        let mut kids = std::mem::take(&mut pending[vi]);
        let sched = if own[vi] == 0 && kids.len() == 1 {
            let (iv, shift) = kids.pop().unwrap();
            (iv, shift + 1)
        } else if own[vi] == 0 && kids.is_empty() {
            continue;
        } else {
            let mut runs: Vec<(u64, u64)> = Vec::new();
            if own[vi] > 0 {
                runs.push((1, own[vi]));
            }
            for (iv, shift) in kids {
                runs.extend(iv.into_iter().map(|(a, b)| (a + shift + 1, b - a + 1)));
            }
            runs.sort_unstable();
            let mut out: Vec<(u64, u64)> = Vec::new();
            for (s, c) in runs {
                match out.last_mut() {
                    Some(last) if s <= last.1 + 1 => last.1 += c,
                    _ => out.push((s, s + c - 1)),
                }
            }
            (out, 0)
        };
        if v == tree.root {
            root_sched = sched.0.into_iter().map(|(a, b)| (a + sched.1, b + sched.1)).collect();
        } else {
            pending[tree.parent[vi] as usize].push(sched);
        }
    }
    let last = root_sched.last().map_or(0, |iv| iv.1);
    let rounds = last + tree.height as u64 - 1;
    check_bound(net, k, rounds);
    BroadcastOutcome {
        rounds,
        messages: up_messages + k * (n as u64 - 1),
    }
}

/// Round-by-round execution of the same schedule as [`broadcast_all`],
/// asserting link capacity and that every node ends with every token. Each
/// send is written to `trace` as `round=<r> phase=<phase> edge=<u>-<v> token=<t>`.
pub fn simulate_broadcast(
    net: &Network,
    holders: &[(Vertex, u64)],
    phase: &str,
    mut trace: Option<&mut dyn Write>,
) -> io::Result<BroadcastOutcome> {
    let n = net.vertex_count();
    let tree = net.tree();
    let (own, k) = per_vertex_counts(net, holders);
    let mut known: Vec<HashSet<u64>> = vec![HashSet::new(); n];
    // Token ids are assigned in vertex order.
    let mut up: Vec<VecDeque<(u64, u64)>> = vec![VecDeque::new(); n];
    let mut down: Vec<VecDeque<(u64, u64)>> = vec![VecDeque::new(); n];
    let mut next_id = 0u64;
    for v in 0..n {
        for _ in 0..own[v] {
            known[v].insert(next_id);
            if v as Vertex == tree.root {
                down[v].push_back((next_id, 1));
            } else {
                up[v].push_back((next_id, 1));
            }
            next_id += 1;
        }
    }
    let mut children: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for &v in &tree.order[1..] {
        children[tree.parent[v as usize] as usize].push(v);
    }

    let mut round = 0u64;
    let mut last_send = 0u64;
    let mut messages = 0u64;
    loop {
        round += 1;
        let mut sends: Vec<(Vertex, Vertex, u64, bool)> = Vec::new();
        for v in 0..n {
            if let Some(&(t, avail)) = up[v].front() {
                if avail <= round {
                    up[v].pop_front();
                    sends.push((v as Vertex, tree.parent[v], t, true));
                }
            }
            if let Some(&(t, avail)) = down[v].front() {
                if avail <= round {
                    down[v].pop_front();
                    for &c in &children[v] {
                        sends.push((v as Vertex, c, t, false));
                    }
                }
            }
        }
        if sends.is_empty() {
            if up.iter().all(|q| q.is_empty()) && down.iter().all(|q| q.is_empty()) {
                break;
            }
            continue;
        }
        last_send = round;
        let mut used = HashSet::new();
        for &(u, v, t, upward) in &sends {
            assert!(used.insert(net.direction(u, v)), "two tokens on {u}->{v} in round {round}");
            messages += 1;
            if let Some(w) = trace.as_deref_mut() {
                writeln!(w, "round={round} phase={phase} edge={u}-{v} token={t}")?;
            }
            known[v as usize].insert(t);
            if upward {
                if v == tree.root {
                    down[v as usize].push_back((t, round + 1));
                } else {
                    up[v as usize].push_back((t, round + 1));
                }
            } else {
                down[v as usize].push_back((t, round + 1));
            }
        }
    }
    assert!(known.iter().all(|s| s.len() as u64 == k), "some node missed a token");
    let rounds = if tree.height == 0 { 0 } else { last_send };
    check_bound(net, k, rounds);
    Ok(BroadcastOutcome { rounds, messages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Digraph;
    use proptest::prelude::*;

    fn path(n: usize) -> Digraph {
        Digraph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn nothing_to_send() {
        let net = Network::new(&path(6)).unwrap();
        assert_eq!(broadcast_all(&net, &[]).rounds, 0);
        assert_eq!(broadcast_all(&net, &[(3, 0)]).rounds, 0);
    }

    #[test]
    fn star_center_streams_to_leaves() {
        // The center is the tree root, so its five tokens leave on rounds
        // 1..=5 over every leaf link in parallel.
        let g = Digraph::new(6, (1..6).map(|i| (0, i))).unwrap();
        let net = Network::new(&g).unwrap();
        assert_eq!(broadcast_all(&net, &[(0, 5)]).rounds, 5);
        assert_eq!(simulate_broadcast(&net, &[(0, 5)], "t", None).unwrap().rounds, 5);
    }

    #[test]
    fn path_endpoint_crosses_every_edge() {
        let net = Network::new(&path(10)).unwrap();
        assert_eq!(broadcast_all(&net, &[(0, 1)]).rounds, 9);
    }

    #[test]
    fn single_vertex() {
        let net = Network::new(&Digraph::empty(1)).unwrap();
        assert_eq!(broadcast_all(&net, &[(0, 4)]).rounds, 0);
        assert_eq!(simulate_broadcast(&net, &[(0, 4)], "t", None).unwrap().rounds, 0);
    }

    #[test]
    fn trace_lines() {
        let net = Network::new(&path(3)).unwrap();
        let mut buf = Vec::new();
        simulate_broadcast(&net, &[(2, 1)], "final", Some(&mut buf)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines,
            vec![
                "round=1 phase=final edge=2-1 token=0",
                "round=2 phase=final edge=1-0 token=0",
                "round=3 phase=final edge=0-1 token=0",
                "round=4 phase=final edge=1-2 token=0",
            ]
        );
    }

    fn arb_connected() -> impl Strategy<Value = Digraph> {
        (1usize..25).prop_flat_map(|n| {
            (
                prop::collection::vec(any::<prop::sample::Index>(), n.saturating_sub(1)),
                prop::collection::vec((0..n, 0..n), 0..n * 2),
                any::<bool>(),
            )
                .prop_map(move |(parents, extra, flip)| {
                    let mut edges: Vec<(usize, usize)> = parents
                        .iter()
                        .enumerate()
                        .map(|(i, p)| {
                            let child = i + 1;
                            let par = p.index(child);
                            if flip {
                                (child, par)
                            } else {
                                (par, child)
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
        fn closed_form_matches_simulation(
            g in arb_connected(),
            holders in prop::collection::vec((any::<prop::sample::Index>(), 0u64..5), 0..8),
        ) {
            let net = Network::new(&g).unwrap();
            let n = g.vertex_count();
            let holders: Vec<(Vertex, u64)> = holders.iter().map(|(i, c)| (i.index(n) as Vertex, *c)).collect();
            let fast = broadcast_all(&net, &holders);
            let slow = simulate_broadcast(&net, &holders, "p", None).unwrap();
            prop_assert_eq!(fast, slow);
        }
    }
}

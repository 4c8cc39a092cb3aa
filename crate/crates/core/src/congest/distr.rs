//! The distributed single-source reachability protocol: sample hubs, learn
//! hop-limited hub relations, simulate the shortcut construction on the hub
//! graph with one global broadcast per unit of logical depth, then search
//! the shortcut hub graph and let every node decide locally.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};
use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exec::ExecMode;
use crate::graph::{log2n, reachable_set, Digraph, Vertex};
use crate::metrics::DepthMetrics;
use crate::observe::{Observer, SubproblemView};
use crate::parallel::{compute_search_scale, parallel_diam_with, DiamConfig};
use crate::reach::{default_k, union_distances};
use crate::rng::{derive_seed, rng, tag};

use super::bfs::limited_bfs_traced;
use super::broadcast::{broadcast_all, simulate_broadcast, BroadcastOutcome};
use super::{CongestError, LimitedBfs, Network, RoundLedger};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alpha {
    /// `ceil(sqrt n)` when `D_hop <= n^(1/4)`, else `ceil(n^(2/3) / D_hop^(2/3))`.
    #[default]
    Auto,
    Fixed(u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RedrawMode {
    /// Report whatever the protocol computes.
    #[default]
    Production,
    /// Compare against the true reachable set and re-draw all randomness on
    /// a mismatch, at most `max_redraws` times.
    Test { max_redraws: u32 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistrConfig {
    pub alpha: Alpha,
    /// Shortcut parameter on the hub graph; default `max(2, ceil(log2 |T|))`.
    pub k: Option<u32>,
    pub mode: RedrawMode,
    pub exec: ExecMode,
}

pub fn auto_alpha(n: usize, d_hop: u32) -> u64 {
    let nf = n as f64;
    let d = d_hop as f64;
    let a = if d <= nf.powf(0.25) {
        nf.sqrt()
    } else {
        (nf / d).powf(2.0 / 3.0)
    };
    ((a * (1.0 - 1e-12)).ceil() as u64).clamp(1, n.max(1) as u64)
}

/// Depth of the final hub-graph search for `t` hubs.
pub fn skeleton_search_depth(t: usize, k: u32) -> u64 {
    compute_search_scale(t, k)
}

/// Hubs and the hop-limited relations among them, over hub indices.
#[derive(Clone, Debug)]
pub struct SkeletonGraph {
    /// Network ids of the hubs, ascending.
    pub hubs: Vec<Vertex>,
    /// Edge `(i, j)` iff `d(hubs[i], hubs[j]) <= h`.
    pub graph: Digraph,
    pub h: u64,
}

impl SkeletonGraph {
    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.hubs.binary_search(&v).ok()
    }
}

#[derive(Clone, Debug)]
pub struct SkeletonBuild {
    pub skeleton: SkeletonGraph,
    /// What every node learned about the hubs.
    pub relations: LimitedBfs,
    pub rounds: u64,
}

/// Samples hubs with probability `min(1, 10 α log2 n / n)`, forces `s` in,
/// and runs hop-limited searches with `h = ceil(10 n log2 n / α)`.
pub fn build_skeleton(net: &Network, alpha: u64, s: Vertex, seed: u64) -> Result<SkeletonBuild, CongestError> {
    build_skeleton_traced(net, alpha, s, seed, None).map_err(|e| e.expect_left())
}

enum Fail {
    Congest(CongestError),
    Io(io::Error),
}

impl Fail {
    fn expect_left(self) -> CongestError {
        match self {
            Fail::Congest(e) => e,
            Fail::Io(e) => panic!("trace write failed without a sink: {e}"),
        }
    }
}

impl From<CongestError> for Fail {
    fn from(e: CongestError) -> Self {
        Fail::Congest(e)
    }
}

impl From<io::Error> for Fail {
    fn from(e: io::Error) -> Self {
        Fail::Io(e)
    }
}

fn build_skeleton_traced(
    net: &Network,
    alpha: u64,
    s: Vertex,
    seed: u64,
    trace: Option<&mut dyn Write>,
) -> Result<SkeletonBuild, Fail> {
    let n = net.vertex_count();
    if s as usize >= n {
        return Err(CongestError::VertexOutOfRange { v: s, n }.into());
    }
    if alpha < 1 || alpha > n as u64 {
        return Err(CongestError::AlphaOutOfRange { alpha, n }.into());
    }
    let l = log2n(n);
    let p = (10.0 * alpha as f64 * l / n as f64).min(1.0);
    let h = (10.0 * n as f64 * l / alpha as f64).ceil() as u64;
    let mut r = rng(derive_seed(seed, tag::SKELETON, 0));
    let hubs: Vec<Vertex> = (0..n as Vertex).filter(|&v| r.gen::<f64>() < p || v == s).collect();
    let relations = limited_bfs_traced(net, &hubs, h, seed, trace)?;
    let mut edges = Vec::new();
    for (i, &u) in hubs.iter().enumerate() {
        for &t in &relations.descendants[u as usize] {
            if t != u {
                edges.push((i, hubs.binary_search(&t).expect("descendant is a hub")));
            }
        }
    }
    let graph = Digraph::new(hubs.len(), edges).expect("hub indices in range");
    Ok(SkeletonBuild {
        rounds: relations.rounds,
        skeleton: SkeletonGraph { hubs, graph, h },
        relations,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistrOutput {
    /// Per node, whether `s` reaches it.
    pub reachable: Vec<bool>,
    pub ledger: RoundLedger,
    pub alpha: u64,
    pub hubs: usize,
    pub h: u64,
    pub skeleton_edges: usize,
    pub k: u32,
    pub broadcasts: u64,
    pub redraws: u32,
    /// In test mode, whether the answer matched the true reachable set.
    pub verified: Option<bool>,
    pub diam: DepthMetrics,
}

/// Token counts per logical time and hub index.
struct EventLog {
    times: Mutex<BTreeMap<u64, HashMap<Vertex, u64>>>,
}

impl Observer for EventLog {
    fn subproblem(&self, v: &SubproblemView<'_>) {
        let Some(ev) = v.events else { return };
        let mut times = self.times.lock().unwrap();
        let mut add = |t: u64, who: Vertex, c: u64| {
            *times.entry(t).or_default().entry(who).or_insert(0) += c;
        };
        // The leader announces the subproblem and its search multiplier.
        add(v.start, ev.leader, 1);
        for &e in &ev.elected {
            add(v.start, e, 1);
        }
        for &(d, w) in &ev.visits {
            add(v.start + d as u64, w, 1);
        }
        let done = v.start + v.bfs_levels as u64 + 1;
        for &(w, c) in &ev.results {
            add(done, w, c);
        }
    }

    fn wants_events(&self) -> bool {
        true
    }
}

struct Sink<'a> {
    out: Option<&'a mut dyn Write>,
}

impl Sink<'_> {
    fn trace(&mut self) -> Option<&mut dyn Write> {
        match &mut self.out {
            Some(w) => Some(&mut **w),
            None => None,
        }
    }

    fn broadcast(&mut self, net: &Network, holders: &[(Vertex, u64)], phase: &str) -> io::Result<BroadcastOutcome> {
        match self.trace() {
            Some(w) => simulate_broadcast(net, holders, phase, Some(w)),
            None => Ok(broadcast_all(net, holders)),
        }
    }
}

fn attempt(net: &Network, s: Vertex, alpha: u64, cfg: &DistrConfig, seed: u64, sink: &mut Sink<'_>) -> Result<DistrOutput, Fail> {
    let n = net.vertex_count();
    let mut ledger = RoundLedger {
        // Spanning tree construction from the root.
        sampling_bfs: net.hop_diameter() as u64,
        messages_total: net.direction_count() as u64,
        ..RoundLedger::default()
    };
    let build = build_skeleton_traced(net, alpha, s, seed, sink.trace())?;
    ledger.skeleton = build.rounds;
    ledger.messages_total += build.relations.messages;
    let sk = &build.skeleton;
    let t = sk.hubs.len();
    let k = cfg.k.unwrap_or_else(|| default_k(t));

    let log = EventLog {
        times: Mutex::new(BTreeMap::new()),
    };
    let mut dcfg = DiamConfig::new(k);
    dcfg.par.exec = cfg.exec;
    dcfg.par.observer = Some(&log);
    let diam = parallel_diam_with(&sk.graph, derive_seed(seed, tag::SIMULATE, 0), &dcfg)
        .map_err(CongestError::from)?;
    let mut broadcasts = 0;
    for (_, holders) in log.times.into_inner().unwrap() {
        let mut h: Vec<(Vertex, u64)> = holders.into_iter().map(|(i, c)| (sk.hubs[i as usize], c)).collect();
        h.sort_unstable();
        let out = sink.broadcast(net, &h, "diam_simulation")?;
        ledger.diam_simulation += out.rounds;
        ledger.messages_total += out.messages;
        broadcasts += 1;
    }

    // Level-synchronous search on the shortcut hub graph; each level's newly
    // reached hubs announce themselves.
    let src = sk.index_of(s).expect("source is a hub");
    let dist = union_distances(&sk.graph, &diam.shortcuts, src as Vertex);
    let limit = skeleton_search_depth(t, k);
    let max_level = dist.iter().filter(|&&d| d != u32::MAX).max().copied().unwrap_or(0) as u64;
    let mut reached_hub = vec![false; t];
    reached_hub[src] = true;
    for level in 1..=max_level.min(limit) {
        let frontier: Vec<(Vertex, u64)> = (0..t)
            .filter(|&i| dist[i] as u64 == level)
            .map(|i| {
                reached_hub[i] = true;
                (sk.hubs[i], 1)
            })
            .collect();
        let out = sink.broadcast(net, &frontier, "final_broadcast")?;
        ledger.final_broadcast += out.rounds;
        ledger.messages_total += out.messages;
        broadcasts += 1;
    }
    let bits: Vec<(Vertex, u64)> = sk.hubs.iter().map(|&v| (v, 1)).collect();
    let out = sink.broadcast(net, &bits, "final_broadcast")?;
    ledger.final_broadcast += out.rounds;
    ledger.messages_total += out.messages;
    broadcasts += 1;

    let reachable = (0..n)
        .map(|v| {
            build.relations.ancestors[v]
                .iter()
                .any(|&a| reached_hub[sk.index_of(a).expect("ancestor is a hub")])
        })
        .collect();
    Ok(DistrOutput {
        reachable,
        ledger,
        alpha,
        hubs: t,
        h: sk.h,
        skeleton_edges: sk.graph.edge_count(),
        k,
        broadcasts,
        redraws: 0,
        verified: None,
        diam: diam.metrics,
    })
}

fn run(net: &Network, s: Vertex, cfg: &DistrConfig, seed: u64, out: Option<&mut dyn Write>) -> Result<DistrOutput, Fail> {
    let n = net.vertex_count();
    if s as usize >= n {
        return Err(CongestError::VertexOutOfRange { v: s, n }.into());
    }
    let alpha = match cfg.alpha {
        Alpha::Auto => auto_alpha(n, net.hop_diameter()),
        Alpha::Fixed(a) => a,
    };
    let mut sink = Sink { out };
    match cfg.mode {
        RedrawMode::Production => attempt(net, s, alpha, cfg, seed, &mut sink),
        RedrawMode::Test { max_redraws } => {
            let truth = reachable_set(net.graph(), s);
            let mut redraws = 0;
            loop {
                let seed_i = if redraws == 0 {
                    seed
                } else {
                    derive_seed(seed, tag::REDRAW, redraws as u64)
                };
                let mut res = attempt(net, s, alpha, cfg, seed_i, &mut sink)?;
                let ok = (0..n).all(|v| res.reachable[v] == truth.contains(v as Vertex));
                res.redraws = redraws;
                res.verified = Some(ok);
                if ok || redraws >= max_redraws {
                    return Ok(res);
                }
                redraws += 1;
            }
        }
    }
}

/// Runs the protocol from `s`. Every node ends with its own reachability
/// bit; round counts are exact for the simulated schedule.
pub fn distr_reach(net: &Network, s: Vertex, cfg: &DistrConfig, seed: u64) -> Result<DistrOutput, CongestError> {
    run(net, s, cfg, seed, None).map_err(|e| e.expect_left())
}

/// [`distr_reach`] with every message written to `trace`. Broadcasts run
/// round by round, so this is much slower.
pub fn distr_reach_traced(
    net: &Network,
    s: Vertex,
    cfg: &DistrConfig,
    seed: u64,
    trace: &mut dyn Write,
) -> io::Result<Result<DistrOutput, CongestError>> {
    match run(net, s, cfg, seed, Some(trace)) {
        Ok(o) => Ok(Ok(o)),
        Err(Fail::Congest(e)) => Ok(Err(e)),
        Err(Fail::Io(e)) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bfs_limited, Direction};

    fn path(n: usize) -> Digraph {
        Digraph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn alpha_rule() {
        assert_eq!(auto_alpha(256, 3), 16);
        assert_eq!(auto_alpha(256, 4), 16);
        assert_eq!(auto_alpha(256, 255), 2);
        // n^(2/3) / D^(2/3) with n = 4096, D = 64: 256 / 16 = 16.
        assert_eq!(auto_alpha(4096, 64), 16);
        assert_eq!(auto_alpha(1, 0), 1);
    }

    #[test]
    fn full_sampling_gives_bounded_closure() {
        let g = path(6);
        let net = Network::new(&g).unwrap();
        let b = build_skeleton(&net, 6, 0, 1).unwrap();
        assert_eq!(b.skeleton.hubs, vec![0, 1, 2, 3, 4, 5]);
        assert!(b.skeleton.h >= 6);
        assert_eq!(b.skeleton.graph.edge_count(), 15);
        assert_eq!(b.rounds, b.relations.rounds);
    }

    #[test]
    fn skeleton_edges_match_limited_search() {
        let g = Digraph::new(8, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 0), (2, 6)]).unwrap();
        let net = Network::new(&g).unwrap();
        for alpha in 1..=8 {
            let b = build_skeleton(&net, alpha, 3, alpha).unwrap();
            let sk = &b.skeleton;
            assert!(sk.hubs.contains(&3));
            for (i, &u) in sk.hubs.iter().enumerate() {
                let d = bfs_limited(&g, u, Direction::Forward, Some(sk.h));
                for (j, &v) in sk.hubs.iter().enumerate() {
                    let expect = i != j && d.get(v).is_some();
                    assert_eq!(sk.graph.has_edge(i as Vertex, j as Vertex), expect);
                }
            }
        }
    }

    #[test]
    fn bad_alpha() {
        let net = Network::new(&path(4)).unwrap();
        assert!(matches!(build_skeleton(&net, 0, 0, 0), Err(CongestError::AlphaOutOfRange { .. })));
        assert!(matches!(build_skeleton(&net, 5, 0, 0), Err(CongestError::AlphaOutOfRange { .. })));
    }

    #[test]
    fn edgeless_graph_reaches_only_source() {
        // A single vertex is the only connected edgeless network.
        let net = Network::new(&Digraph::empty(1)).unwrap();
        let out = distr_reach(&net, 0, &DistrConfig::default(), 0).unwrap();
        assert_eq!(out.reachable, vec![true]);
        assert_eq!(out.ledger.total(), 0);
    }

    #[test]
    fn path_matches_truth() {
        let g = path(40);
        let net = Network::new(&g).unwrap();
        for s in [0, 17, 39] {
            let cfg = DistrConfig {
                mode: RedrawMode::Test { max_redraws: 0 },
                ..DistrConfig::default()
            };
            let out = distr_reach(&net, s, &cfg, 9).unwrap();
            assert_eq!(out.verified, Some(true));
            let expect: Vec<bool> = (0..40).map(|v| v >= s as usize).collect();
            assert_eq!(out.reachable, expect);
            assert!(out.ledger.total() >= net.hop_diameter() as u64);
        }
    }

    #[test]
    fn traced_run_matches_untraced() {
        let g = Digraph::new(6, [(0, 1), (1, 2), (3, 2), (3, 4), (4, 5)]).unwrap();
        let net = Network::new(&g).unwrap();
        let cfg = DistrConfig::default();
        let plain = distr_reach(&net, 3, &cfg, 4).unwrap();
        let mut buf = Vec::new();
        let traced = distr_reach_traced(&net, 3, &cfg, 4, &mut buf).unwrap().unwrap();
        assert_eq!(plain.reachable, traced.reachable);
        assert_eq!(plain.ledger, traced.ledger);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().all(|l| l.starts_with("round=") && l.contains(" phase=") && l.contains(" token=")));
    }
}

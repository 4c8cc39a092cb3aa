//! Round-level simulation of the synchronous bandwidth-limited network model
//! and of the distributed reachability protocol built on the shortcut
//! algorithms.
//!
//! Each round, every node may send one token (an `O(log n)`-bit message) in
//! each direction of each incident link. Tokens are counted, not encoded.

mod bfs;
mod broadcast;
mod distr;
mod network;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bfs::{limited_bfs_all, LimitedBfs};
pub use broadcast::{broadcast_all, simulate_broadcast, BroadcastOutcome};
pub use distr::{
    auto_alpha, build_skeleton, distr_reach, distr_reach_traced, skeleton_search_depth, Alpha, DistrConfig,
    DistrOutput, RedrawMode, SkeletonBuild, SkeletonGraph,
};
pub use network::{communication_component, Network, SpanningTree};

use crate::graph::Vertex;
use crate::seq::ParamError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CongestError {
    #[error("network has no vertices")]
    Empty,
    #[error("communication graph is disconnected: {reached} of {n} vertices reachable from vertex 0")]
    Disconnected { reached: usize, n: usize },
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: Vertex, n: usize },
    #[error("alpha = {alpha} outside 1..={n}")]
    AlphaOutOfRange { alpha: u64, n: usize },
    #[error("hub set is empty")]
    NoHubs,
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Rounds spent per protocol phase.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLedger {
    /// Spanning tree setup; hub sampling itself is local.
    pub sampling_bfs: u64,
    /// Hop-limited searches from every hub.
    pub skeleton: u64,
    /// Broadcasts simulating the shortcut construction on the skeleton.
    pub diam_simulation: u64,
    /// Skeleton search plus the final reachability broadcast.
    pub final_broadcast: u64,
    pub messages_total: u64,
}

impl RoundLedger {
    pub fn total(&self) -> u64 {
        self.sampling_bfs + self.skeleton + self.diam_simulation + self.final_broadcast
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRounds {
    pub phase: String,
    pub rounds: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundReport {
    pub phases: Vec<PhaseRounds>,
    pub total_rounds: u64,
    pub messages_total: u64,
}

pub fn round_report(ledger: &RoundLedger) -> RoundReport {
    let phases = [
        ("sampling_bfs", ledger.sampling_bfs),
        ("skeleton", ledger.skeleton),
        ("diam_simulation", ledger.diam_simulation),
        ("final_broadcast", ledger.final_broadcast),
    ]
    .into_iter()
    .map(|(p, r)| PhaseRounds {
        phase: p.to_string(),
        rounds: r,
    })
    .collect();
    RoundReport {
        phases,
        total_rounds: ledger.total(),
        messages_total: ledger.messages_total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_ledger_reports_zeros() {
        let r = round_report(&RoundLedger::default());
        assert_eq!(r.total_rounds, 0);
        assert_eq!(r.messages_total, 0);
        assert_eq!(r.phases.len(), 4);
        assert!(r.phases.iter().all(|p| p.rounds == 0));
    }

    #[test]
    fn phases_sum_to_total() {
        let l = RoundLedger {
            sampling_bfs: 3,
            skeleton: 10,
            diam_simulation: 200,
            final_broadcast: 7,
            messages_total: 999,
        };
        let r = round_report(&l);
        assert_eq!(r.phases.iter().map(|p| p.rounds).sum::<u64>(), r.total_rounds);
        assert_eq!(r.total_rounds, 220);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<RoundReport>(&json).unwrap(), r);
    }
}

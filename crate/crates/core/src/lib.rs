//! Diameter-reducing shortcuts for directed graphs: a sequential and a
//! distance-limited parallel construction, reachability on top of them, and
//! a round-level simulation of the distributed protocol.

pub mod congest;
pub mod engine;
pub mod exec;
pub mod graph;
pub mod harness;
pub mod labels;
pub mod metrics;
pub mod observe;
pub mod parallel;
pub mod reach;
pub mod rng;
pub mod seq;
pub mod shortcut;
pub mod validate;

pub use engine::Budget;
pub use exec::ExecMode;
pub use graph::{Digraph, Direction, Vertex, VertexSet};
pub use metrics::{DepthMetrics, WorkMetrics};
pub use shortcut::{Shortcut, ShortcutSet};

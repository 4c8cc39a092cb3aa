//! Sequential shortcutting with unlimited searches.

use rand::Rng;
use thiserror::Error;

use crate::engine::{level_cap, sample_probability, solve, EngineCfg, Tally};
use crate::exec::{chunk_width, map_vec, ExecMode};
use crate::graph::{Digraph, Direction, Traversal, Vertex, VertexSet};
use crate::labels::{partition_cells, Label, LabelTable};
use crate::metrics::WorkMetrics;
use crate::observe::Observer;
use crate::rng::{derive_seed, tag};
use crate::shortcut::{pack, Anchor, ShortcutSet};

pub(crate) const SEQ_SAMPLING_CONSTANT: f64 = 20.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("k must be at least 2, got {0}")]
    KTooSmall(u32),
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("vertex {v} out of range for a graph with {n} vertices")]
    VertexOutOfRange { v: Vertex, n: usize },
}

/// Recursion state of one subproblem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeqCtx {
    pub n_top: usize,
    pub k: u32,
    pub r: u32,
    pub seed: u64,
}

impl SeqCtx {
    pub fn new(n_top: usize, k: u32, r: u32, seed: u64) -> Self {
        SeqCtx { n_top, k, r, seed }
    }

    /// `min(1, 20 * k^(r+1) * log2(n_top) / n_top)`.
    pub fn p_r(&self) -> f64 {
        sample_probability(SEQ_SAMPLING_CONSTANT, self.n_top, self.k, self.r)
    }

    /// Deepest level that runs, `ceil(log_k n_top) + 1`.
    pub fn level_cap(&self) -> u32 {
        level_cap(self.n_top, self.k)
    }
}

/// Includes each vertex independently with probability `ctx.p_r()`.
pub fn sample_shortcutters<R: Rng>(vertices: &VertexSet, ctx: &SeqCtx, rng: &mut R) -> VertexSet {
    let p = ctx.p_r();
    VertexSet::from_iter(vertices.universe(), vertices.iter().filter(|_| rng.gen::<f64>() < p))
}

/// Labels and shortcuts produced by a single shortcutter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortcutterOutcome {
    pub labels: Vec<(Vertex, Label)>,
    pub shortcuts: ShortcutSet,
}

/// Searches from `v` in both directions without a limit, then shortcuts `v`
/// to every descendant and every ancestor to `v`. Descendants only get
/// `Des(v)`, ancestors only get `Anc(v)`, and vertices on both sides are
/// eliminated.
pub fn label_from_shortcutter(g: &Digraph, v: Vertex) -> ShortcutterOutcome {
    let mut fwd = Traversal::new(g.vertex_count());
    let mut bwd = Traversal::new(g.vertex_count());
    fwd.run(g, v, Direction::Forward, None);
    bwd.run(g, v, Direction::Backward, None);
    let mut labels = Vec::new();
    let mut raw = Vec::new();
    for &w in fwd.visited() {
        if w != v {
            raw.push(pack(v, w, 0, Anchor::Source));
        }
        let label = if bwd.distance(w).is_some() {
            Label::eliminated(v)
        } else {
            Label::des(v)
        };
        labels.push((w, label));
    }
    for &w in bwd.visited() {
        if w != v {
            raw.push(pack(w, v, 0, Anchor::Target));
        }
        if fwd.distance(w).is_none() {
            labels.push((w, Label::anc(v)));
        }
    }
    labels.sort_by_key(|&(w, _)| w);
    ShortcutterOutcome {
        labels,
        shortcuts: ShortcutSet::from_raw(g.vertex_count(), raw),
    }
}

/// Result of one shortcutting round from a fixed shortcutter set.
#[derive(Clone, Debug)]
pub struct RoundOutcome {
    pub shortcuts: ShortcutSet,
    pub labels: LabelTable,
    /// Partition cells of the surviving vertices, in canonical order.
    pub cells: Vec<VertexSet>,
}

/// Runs the search, shortcut, label and partition steps of one level with an
/// explicit shortcutter set and no recursion.
pub fn shortcut_round(g: &Digraph, shortcutters: &[Vertex]) -> RoundOutcome {
    let n = g.vertex_count();
    let mut s = shortcutters.to_vec();
    s.sort_unstable();
    s.dedup();
    let mut labels = LabelTable::new(n);
    let mut shortcuts = ShortcutSet::new();
    for &v in &s {
        let out = label_from_shortcutter(g, v);
        for (w, label) in out.labels {
            labels.add(w, label);
        }
        shortcuts.union_with(&out.shortcuts);
    }
    let mut cmp = 0;
    let cells = partition_cells(&labels, &mut cmp)
        .into_iter()
        .map(|c| VertexSet::from_iter(n, c))
        .collect();
    RoundOutcome {
        shortcuts,
        labels,
        cells,
    }
}

/// Knobs for [`seq_shortcut_with`].
#[derive(Clone, Copy, Default)]
pub struct SeqOptions<'a> {
    pub exec: ExecMode,
    /// Vertices added to the top-level shortcutter sample.
    pub forced_shortcutters: &'a [Vertex],
    pub observer: Option<&'a dyn Observer>,
}

fn check_k(k: u32) -> Result<(), ParamError> {
    if k < 2 {
        return Err(ParamError::KTooSmall(k));
    }
    Ok(())
}

fn run_once(g: &Digraph, k: u32, seed: u64, opts: &SeqOptions<'_>) -> (Vec<u64>, Tally) {
    let n = g.vertex_count();
    let cfg = EngineCfg {
        n_top: n,
        k,
        p_const: SEQ_SAMPLING_CONSTANT,
        search: None,
        r_max: level_cap(n, k),
        r_fringe_max: 0,
        exec: opts.exec,
        observer: opts.observer,
        budget: None,
    };
    let ids: Vec<Vertex> = (0..n as Vertex).collect();
    let out = solve(&cfg, g, &ids, 0, 0, seed, 0, opts.forced_shortcutters).expect("no budget");
    (out.raw, out.tally)
}

/// One full recursive run from level 0.
pub fn seq_shortcut(g: &Digraph, k: u32, seed: u64) -> Result<(ShortcutSet, WorkMetrics), ParamError> {
    seq_shortcut_with(g, k, seed, &SeqOptions::default())
}

pub fn seq_shortcut_with(
    g: &Digraph,
    k: u32,
    seed: u64,
    opts: &SeqOptions<'_>,
) -> Result<(ShortcutSet, WorkMetrics), ParamError> {
    check_k(k)?;
    for &v in opts.forced_shortcutters {
        if v as usize >= g.vertex_count() {
            return Err(ParamError::VertexOutOfRange { v, n: g.vertex_count() });
        }
    }
    let (raw, tally) = run_once(g, k, seed, opts);
    let set = ShortcutSet::from_raw(g.vertex_count(), raw);
    let metrics = WorkMetrics::from_tally(&tally, set.len());
    Ok((set, metrics))
}

/// `ceil(log2 n)`, at least 1.
pub fn default_repetitions(n: usize) -> usize {
    (crate::graph::log2n(n).ceil() as usize).max(1)
}

/// Seed of the `i`-th repetition.
pub fn repetition_seed(seed: u64, i: usize) -> u64 {
    derive_seed(seed, tag::REPETITION, i as u64)
}

/// Union of independent runs with seeds [`repetition_seed`]`(seed, i)`.
/// `repetitions = None` uses [`default_repetitions`].
pub fn seq_shortcut_whp(
    g: &Digraph,
    k: u32,
    repetitions: Option<usize>,
    seed: u64,
    exec: ExecMode,
) -> Result<(ShortcutSet, WorkMetrics), ParamError> {
    check_k(k)?;
    let reps = repetitions.unwrap_or_else(|| default_repetitions(g.vertex_count()));
    if reps == 0 {
        return Err(ParamError::NoRepetitions);
    }
    let n = g.vertex_count();
    let opts = SeqOptions {
        exec,
        ..SeqOptions::default()
    };
    let mut set = ShortcutSet::new();
    let mut tally = Tally::default();
    let width = chunk_width(exec);
    let all: Vec<usize> = (0..reps).collect();
    // Only a few runs are alive at once; each run's records are folded into
    // the union before the next batch starts.
    for batch in all.chunks(width) {
        let outs = map_vec(exec, batch.to_vec(), |i| run_once(g, k, repetition_seed(seed, i), &opts));
        for (raw, t) in outs {
            set.absorb_raw(n, raw);
            tally.merge(&t);
        }
    }
    let metrics = WorkMetrics::from_tally(&tally, set.len());
    Ok((set, metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{reachable_set, DistMap};
    use crate::labels::LabelKind;
    use crate::rng::rng;
    use proptest::prelude::*;

    fn path(n: usize) -> Digraph {
        Digraph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn p3_middle_shortcutter() {
        let out = label_from_shortcutter(&path(3), 1);
        assert_eq!(out.shortcuts.pairs().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert_eq!(
            out.labels,
            vec![(0, Label::anc(1)), (1, Label::eliminated(1)), (2, Label::des(1))]
        );
    }

    #[test]
    fn two_cycle_eliminates_both() {
        let g = Digraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let out = label_from_shortcutter(&g, 0);
        assert!(out.labels.iter().all(|(_, l)| l.kind == LabelKind::Eliminated));
        assert_eq!(out.labels.len(), 2);
    }

    #[test]
    fn star_center() {
        let g = Digraph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let out = label_from_shortcutter(&g, 0);
        assert_eq!(out.shortcuts.pairs().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (0, 3)]);
        assert_eq!(
            out.labels,
            vec![
                (0, Label::eliminated(0)),
                (1, Label::des(0)),
                (2, Label::des(0)),
                (3, Label::des(0))
            ]
        );
    }

    #[test]
    fn round_partition_of_p3() {
        let out = shortcut_round(&path(3), &[1]);
        let cells: Vec<_> = out.cells.iter().map(|c| c.to_vec()).collect();
        assert_eq!(cells, vec![vec![0], vec![2]]);
    }

    #[test]
    fn sampling_clamps_and_handles_empty() {
        let ctx = SeqCtx::new(16, 4, 3, 0);
        assert_eq!(ctx.p_r(), 1.0);
        let all = VertexSet::full(16);
        assert_eq!(sample_shortcutters(&all, &ctx, &mut rng(1)).len(), 16);
        assert!(sample_shortcutters(&VertexSet::new(16), &ctx, &mut rng(1)).is_empty());
    }

    #[test]
    fn sampling_mean_matches_probability() {
        let ctx = SeqCtx::new(1024, 4, 0, 0);
        assert!((ctx.p_r() - 0.78125).abs() < 1e-12);
        let all = VertexSet::full(1024);
        let mut r = rng(99);
        let trials = 2000;
        let total: usize = (0..trials).map(|_| sample_shortcutters(&all, &ctx, &mut r).len()).sum();
        let mean = total as f64 / (trials * 1024) as f64;
        assert!((mean / 0.78125 - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn single_vertex() {
        let g = Digraph::empty(1);
        let (set, m) = seq_shortcut(&g, 2, 5).unwrap();
        assert!(set.is_empty());
        assert!(m.max_r_reached <= level_cap(1, 2));
    }

    #[test]
    fn rejects_small_k() {
        assert_eq!(seq_shortcut(&path(3), 1, 0).unwrap_err(), ParamError::KTooSmall(1));
        assert_eq!(
            seq_shortcut_whp(&path(3), 2, Some(0), 0, ExecMode::Sequential).unwrap_err(),
            ParamError::NoRepetitions
        );
    }

    #[test]
    fn whp_single_repetition_matches_plain_run() {
        let g = path(40);
        let (whp, _) = seq_shortcut_whp(&g, 2, Some(1), 7, ExecMode::Sequential).unwrap();
        let (one, _) = seq_shortcut(&g, 2, repetition_seed(7, 0)).unwrap();
        assert_eq!(whp, one);
    }

    #[test]
    fn long_path_head_tail_shrinks() {
        let n = 4096;
        let g = path(n);
        let (f, _) = seq_shortcut(&g, 8, 3).unwrap();
        let aug = f.augment(&g);
        let d: DistMap = crate::graph::bfs_limited(&aug, 0, Direction::Forward, None);
        assert!(d.get(n as Vertex - 1).unwrap() < n as u32 - 1);
    }

    fn arb_graph() -> impl Strategy<Value = Digraph> {
        (1usize..24).prop_flat_map(|n| {
            prop::collection::vec((0..n, 0..n), 0..n * 3).prop_map(move |e| Digraph::new(n, e).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn preserves_reachability(g in arb_graph(), k in 2u32..5, seed in any::<u64>()) {
            let (f, m) = seq_shortcut(&g, k, seed).unwrap();
            let aug = f.augment(&g);
            for s in 0..g.vertex_count() as Vertex {
                prop_assert_eq!(reachable_set(&g, s).to_vec(), reachable_set(&aug, s).to_vec());
            }
            prop_assert!(m.max_r_reached <= level_cap(g.vertex_count(), k));
            prop_assert_eq!(m.shortcuts_added as usize, f.len());
        }

        #[test]
        fn parallel_mode_is_identical(g in arb_graph(), seed in any::<u64>()) {
            let (a, ma) = seq_shortcut_whp(&g, 2, Some(3), seed, ExecMode::Sequential).unwrap();
            let (b, mb) = seq_shortcut_whp(&g, 2, Some(3), seed, ExecMode::Parallel).unwrap();
            prop_assert_eq!(a.iter().collect::<Vec<_>>(), b.iter().collect::<Vec<_>>());
            prop_assert_eq!(ma, mb);
        }
    }
}

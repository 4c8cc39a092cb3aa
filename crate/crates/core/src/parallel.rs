//! Distance-limited shortcutting with fringe-ring recursion, the repeated
//! driver with abort budgets, and logical depth accounting.

use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{level_cap, sample_probability, solve, Budget, EngineCfg, SearchRule, Tally};
use crate::exec::{chunk_width, map_vec, ExecMode};
use crate::graph::{log2n, reachable_pair_count, Digraph, Vertex, VertexSet};
use crate::labels::LabelTable;
use crate::metrics::DepthMetrics;
use crate::observe::{Observer, RingView, SubproblemView};
use crate::rng::{derive_seed, tag};
use crate::seq::ParamError;
use crate::shortcut::ShortcutSet;

pub(crate) const PAR_SAMPLING_CONSTANT: f64 = 10.0;

/// `ceil(100 * sqrt(2)^(log_k n) * sqrt(n) * log2(n)^2)`, at least 1.
pub fn compute_search_scale(n_top: usize, k: u32) -> u64 {
    let l = log2n(n_top);
    if l == 0.0 {
        return 1;
    }
    let log_k = l / (k as f64).log2();
    // sqrt(2)^(log_k n) * sqrt(n) == 2^((log_k n + log2 n) / 2)
    let x = 100.0 * 2f64.powf((log_k + l) / 2.0) * l * l;
    let d = (x * (1.0 - 1e-12)).ceil();
    if d >= u64::MAX as f64 {
        u64::MAX
    } else {
        (d as u64).max(1)
    }
}

/// `kappa_i = 10^6 * k^2 * log2(n)^5 * (1 + 1/(4 log2 n))^(-i)`.
pub fn kappa_bound(n_top: usize, k: u32, i: u32) -> f64 {
    let l = log2n(n_top);
    let base = 1e6 * (k as f64).powi(2) * l.powi(5);
    base * (1.0 + 1.0 / (4.0 * l)).powi(-(i as i32))
}

/// Integer interval `[ceil(kappa_{2r+1}), floor(kappa_{2r})]`, if nonempty.
pub fn kappa_interval(n_top: usize, k: u32, r: u32) -> Option<(u64, u64)> {
    let hi = kappa_bound(n_top, k, 2 * r).floor();
    let lo = kappa_bound(n_top, k, 2 * r + 1).ceil();
    if !hi.is_finite() || !lo.is_finite() || lo > hi || hi < 1.0 {
        return None;
    }
    let cap = (u64::MAX / 2) as f64;
    Some((lo.min(cap) as u64, hi.min(cap) as u64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KappaDraw {
    pub kappa: u64,
    /// The interval was empty and the fallback value was used.
    pub degenerate: bool,
}

/// Uniform integer from [`kappa_interval`]. When the interval is empty the
/// draw falls back to `max(1, floor(kappa_{2r}))`.
pub fn sample_kappa<R: Rng>(n_top: usize, k: u32, r: u32, rng: &mut R) -> KappaDraw {
    match kappa_interval(n_top, k, r) {
        Some((lo, hi)) => KappaDraw {
            kappa: rng.gen_range(lo..=hi),
            degenerate: false,
        },
        None => {
            let hi = kappa_bound(n_top, k, 2 * r).floor();
            let kappa = if hi.is_finite() && hi >= 1.0 {
                hi.min((u64::MAX / 2) as f64) as u64
            } else {
                1
            };
            KappaDraw {
                kappa,
                degenerate: true,
            }
        }
    }
}

/// Replaces the search scale and the multiplier interval, so that searches
/// truncate on small graphs and fringe rings appear.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleOverride {
    pub search_scale: u64,
    pub kappa_min: u64,
    pub kappa_max: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum KappaRule {
    Sampled,
    Fixed { min: u64, max: u64 },
}

pub(crate) fn draw_kappa<R: Rng>(rule: KappaRule, n_top: usize, k: u32, r: u32, rng: &mut R) -> (u64, bool) {
    match rule {
        KappaRule::Sampled => {
            let d = sample_kappa(n_top, k, r, rng);
            (d.kappa, d.degenerate)
        }
        KappaRule::Fixed { min, max } => (rng.gen_range(min.max(1)..=max.max(min).max(1)), false),
    }
}

/// Recursion state of one subproblem of the distance-limited algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParCtx {
    pub n_top: usize,
    pub k: u32,
    pub r: u32,
    pub r_fringe: u32,
    pub kappa: u64,
    pub search_scale: u64,
    pub seed: u64,
}

impl ParCtx {
    /// `min(1, 10 * k^(r+1) * log2(n_top) / n_top)`.
    pub fn p_r(&self) -> f64 {
        sample_probability(PAR_SAMPLING_CONSTANT, self.n_top, self.k, self.r)
    }

    pub fn level_cap(&self) -> u32 {
        level_cap(self.n_top, self.k)
    }

    /// `ceil(log2 n_top)`.
    pub fn fringe_cap(&self) -> u32 {
        fringe_cap(self.n_top)
    }
}

fn fringe_cap(n_top: usize) -> u32 {
    log2n(n_top).ceil() as u32
}

/// Vertices between `(κ-1)D` and `(κ+1)D` hops of a shortcutter, in either
/// direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FringeRing {
    pub owner: Vertex,
    pub members: VertexSet,
}

/// Configuration shared by [`parallel_sc`] and [`parallel_diam_with`].
#[derive(Clone, Copy)]
pub struct ParConfig<'a> {
    pub exec: ExecMode,
    pub scale_override: Option<ScaleOverride>,
    pub observer: Option<&'a dyn Observer>,
    /// Keep the top-level labels, cells and rings in the output.
    pub capture_top: bool,
}

impl Default for ParConfig<'_> {
    fn default() -> Self {
        ParConfig {
            exec: ExecMode::Sequential,
            scale_override: None,
            observer: None,
            capture_top: false,
        }
    }
}

/// Top-level subproblem of a [`parallel_sc`] run.
#[derive(Clone, Debug)]
pub struct TopLevel {
    pub kappa: u64,
    pub search_scale: u64,
    pub shortcutters: Vec<Vertex>,
    pub labels: LabelTable,
    pub cells: Vec<VertexSet>,
    pub rings: Vec<FringeRing>,
}

#[derive(Clone, Debug)]
pub struct ParallelScOutput {
    pub shortcuts: ShortcutSet,
    pub metrics: DepthMetrics,
    /// Present when [`ParConfig::capture_top`] is set.
    pub top: Option<TopLevel>,
}

struct TopCapture<'a> {
    inner: Option<&'a dyn Observer>,
    n: usize,
    top: Mutex<Option<TopLevel>>,
}

impl Observer for TopCapture<'_> {
    fn subproblem(&self, v: &SubproblemView<'_>) {
        if v.r == 0 && v.r_fringe == 0 {
            *self.top.lock().unwrap() = Some(TopLevel {
                kappa: v.kappa.unwrap_or(0),
                search_scale: v.search_scale.unwrap_or(0),
                shortcutters: v.shortcutters.iter().map(|&l| v.ids[l as usize]).collect(),
                labels: v.labels.clone(),
                cells: v
                    .cells
                    .iter()
                    .map(|c| VertexSet::from_iter(self.n, c.iter().map(|&l| v.ids[l as usize])))
                    .collect(),
                rings: Vec::new(),
            });
        }
        if let Some(o) = self.inner {
            o.subproblem(v);
        }
    }

    fn fringe_ring(&self, v: &RingView<'_>) {
        if v.r == 0 && v.r_fringe == 0 {
            if let Some(top) = self.top.lock().unwrap().as_mut() {
                top.rings.push(FringeRing {
                    owner: v.owner,
                    members: VertexSet::from_iter(self.n, v.members.iter().map(|&l| v.ids[l as usize])),
                });
            }
        }
        if let Some(o) = self.inner {
            o.fringe_ring(v);
        }
    }

    fn wants_events(&self) -> bool {
        self.inner.is_some_and(|o| o.wants_events())
    }
}

fn search_rule(n_top: usize, k: u32, ov: Option<ScaleOverride>) -> SearchRule {
    match ov {
        Some(o) => SearchRule {
            d: o.search_scale.max(1),
            kappa: KappaRule::Fixed {
                min: o.kappa_min,
                max: o.kappa_max,
            },
        },
        None => SearchRule {
            d: compute_search_scale(n_top, k),
            kappa: KappaRule::Sampled,
        },
    }
}

struct RunOut {
    raw: Vec<u64>,
    tally: Tally,
    depth: u64,
}

/// One run over `g` from level 0. `n_top` is the vertex count used in the
/// formulas; the run's root subproblem starts at logical time `start`.
#[allow(clippy::too_many_arguments)]
fn run_sc(
    g: &Digraph,
    k: u32,
    seed: u64,
    exec: ExecMode,
    ov: Option<ScaleOverride>,
    observer: Option<&dyn Observer>,
    budget: Option<&Budget>,
    start: u64,
) -> Option<RunOut> {
    let n = g.vertex_count();
    let cfg = EngineCfg {
        n_top: n,
        k,
        p_const: PAR_SAMPLING_CONSTANT,
        search: Some(search_rule(n, k, ov)),
        r_max: level_cap(n, k),
        r_fringe_max: fringe_cap(n),
        exec,
        observer,
        budget,
    };
    let ids: Vec<Vertex> = (0..n as Vertex).collect();
    solve(&cfg, g, &ids, 0, 0, seed, start, &[]).map(|o| RunOut {
        raw: o.raw,
        tally: o.tally,
        depth: o.depth,
    })
}

/// One full run of the distance-limited algorithm from level 0.
pub fn parallel_sc(g: &Digraph, k: u32, seed: u64, cfg: &ParConfig<'_>) -> Result<ParallelScOutput, ParamError> {
    if k < 2 {
        return Err(ParamError::KTooSmall(k));
    }
    let capture = TopCapture {
        inner: cfg.observer,
        n: g.vertex_count(),
        top: Mutex::new(None),
    };
    let observer: Option<&dyn Observer> = if cfg.capture_top { Some(&capture) } else { cfg.observer };
    let out = run_sc(g, k, seed, cfg.exec, cfg.scale_override, observer, None, 0).expect("no budget");
    let shortcuts = ShortcutSet::from_raw(g.vertex_count(), out.raw);
    let metrics = DepthMetrics::from_tally(&out.tally, out.depth, shortcuts.len());
    Ok(ParallelScOutput {
        shortcuts,
        metrics,
        top: capture.top.into_inner().unwrap(),
    })
}

/// A node of a subproblem tree for [`depth_account`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DepthNode {
    pub local_cost: u64,
    pub children: Vec<DepthNode>,
}

impl DepthNode {
    /// Local cost from the pseudocode's measurable parts: the longest search,
    /// the partition sort charged as `ceil(log2 size) * max_labels`, and a
    /// constant per line group.
    pub fn local(bfs_levels: u64, size: usize, max_labels: u64) -> u64 {
        bfs_levels + crate::engine::ceil_log2(size) * max_labels + crate::engine::LINE_GROUP_COST
    }

    pub fn leaf(local_cost: u64) -> Self {
        DepthNode {
            local_cost,
            children: Vec::new(),
        }
    }
}

/// Longest root-to-leaf sum of local costs. Siblings run concurrently, so
/// they contribute their maximum.
pub fn depth_account(root: &DepthNode) -> u64 {
    root.local_cost + root.children.iter().map(depth_account).max().unwrap_or(0)
}

/// How abort budgets are set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    /// `C_w (m k + n k^2) log2^3 n` work and `C_s n k log2^3 n` shortcuts.
    Formula,
    /// `C` times the median over this many unbounded calibration runs.
    Calibrated { runs: usize },
}

#[derive(Clone, Copy)]
pub struct DiamConfig<'a> {
    pub k: u32,
    pub par: ParConfig<'a>,
    pub c_work: f64,
    pub c_shortcut: f64,
    pub budget_mode: BudgetMode,
    /// Overrides of the `ceil(10 log2 n)` loop counts.
    pub outer_iterations: Option<usize>,
    pub inner_iterations: Option<usize>,
    /// Stop once the working graph is transitively closed.
    pub closure_exit: bool,
    /// Memory allowed for the closure count used by `closure_exit`.
    pub closure_max_bytes: usize,
}

impl<'a> DiamConfig<'a> {
    pub fn new(k: u32) -> Self {
        DiamConfig {
            k,
            par: ParConfig::default(),
            c_work: 10.0,
            c_shortcut: 10.0,
            budget_mode: BudgetMode::Formula,
            outer_iterations: None,
            inner_iterations: None,
            closure_exit: true,
            closure_max_bytes: 1 << 29,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub depth: u64,
    pub runs: u64,
    pub aborted: u64,
    /// Shortcut count after the iteration's merge.
    pub shortcuts_total: u64,
}

#[derive(Clone, Debug)]
pub struct DiamOutput {
    pub shortcuts: ShortcutSet,
    pub metrics: DepthMetrics,
    pub work_budget: u64,
    pub shortcut_budget: u64,
    pub iterations: Vec<IterationSummary>,
}

/// `ceil(10 log2 n)`, at least 1.
pub fn default_iterations(n: usize) -> usize {
    ((10.0 * log2n(n)).ceil() as usize).max(1)
}

fn saturating_u64(x: f64) -> u64 {
    if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x.max(0.0) as u64
    }
}

fn median(mut v: Vec<u64>) -> u64 {
    v.sort_unstable();
    if v.is_empty() {
        0
    } else {
        v[v.len() / 2]
    }
}

fn budgets(g: &Digraph, seed: u64, cfg: &DiamConfig<'_>) -> (u64, u64) {
    let n = g.vertex_count() as f64;
    let m = g.edge_count() as f64;
    let k = cfg.k as f64;
    let l3 = log2n(g.vertex_count()).powi(3);
    match cfg.budget_mode {
        BudgetMode::Formula => (
            saturating_u64(cfg.c_work * (m * k + n * k * k) * l3),
            saturating_u64(cfg.c_shortcut * n * k * l3),
        ),
        BudgetMode::Calibrated { runs } => {
            let ids: Vec<usize> = (0..runs.max(1)).collect();
            let outs = map_vec(cfg.par.exec, ids, |i| {
                let s = derive_seed(seed, tag::SAMPLE, i as u64);
                let o = run_sc(g, cfg.k, s, ExecMode::Sequential, cfg.par.scale_override, None, None, 0)
                    .expect("no budget");
                (o.tally.work(), o.tally.insertions)
            });
            let w = median(outs.iter().map(|o| o.0).collect());
            let s = median(outs.iter().map(|o| o.1).collect());
            (
                saturating_u64(cfg.c_work * w as f64).max(1),
                saturating_u64(cfg.c_shortcut * s as f64).max(1),
            )
        }
    }
}

/// Repeated runs with merging: `ceil(10 log2 n)` outer iterations, each
/// running `ceil(10 log2 n)` independent runs on the current graph and then
/// adding all surviving shortcuts to it.
pub fn parallel_diam(g: &Digraph, k: u32, seed: u64) -> Result<(ShortcutSet, DepthMetrics), ParamError> {
    let out = parallel_diam_with(g, seed, &DiamConfig::new(k))?;
    Ok((out.shortcuts, out.metrics))
}

pub fn parallel_diam_with(g: &Digraph, seed: u64, cfg: &DiamConfig<'_>) -> Result<DiamOutput, ParamError> {
    let k = cfg.k;
    if k < 2 {
        return Err(ParamError::KTooSmall(k));
    }
    let n = g.vertex_count();
    let outer = cfg.outer_iterations.unwrap_or_else(|| default_iterations(n));
    let inner = cfg.inner_iterations.unwrap_or_else(|| default_iterations(n));
    let (work_budget, shortcut_budget) = budgets(g, seed, cfg);
    let closure_pairs = if cfg.closure_exit {
        reachable_pair_count(g, cfg.closure_max_bytes)
    } else {
        None
    };
    let original_nonself: Vec<(Vertex, Vertex)> = g.edges().filter(|(u, v)| u != v).collect();

    let mut f = ShortcutSet::new();
    let mut tally = Tally::default();
    let mut work = 0u64;
    let mut depth = 0u64;
    let mut runs = 0u64;
    let mut aborted = 0u64;
    let mut iterations = Vec::new();
    let mut skipped = 0u64;
    let mut working: Option<Digraph> = None;
    let width = chunk_width(cfg.par.exec);

    for i in 0..outer {
        let current = working.as_ref().unwrap_or(g);
        let iter_seed = derive_seed(seed, tag::OUTER_ITER, i as u64);
        let mut iter_depth = 0u64;
        let mut iter_aborted = 0u64;
        let all: Vec<usize> = (0..inner).collect();
        for batch in all.chunks(width) {
            let outs = map_vec(cfg.par.exec, batch.to_vec(), |j| {
                let budget = Budget::new(work_budget, shortcut_budget);
                let out = run_sc(
                    current,
                    k,
                    derive_seed(iter_seed, tag::INNER_RUN, j as u64),
                    cfg.par.exec,
                    cfg.par.scale_override,
                    cfg.par.observer,
                    Some(&budget),
                    depth,
                );
                // A run that stayed within budget cannot have tripped it.
                out.filter(|_| !budget.tripped())
            });
            for out in outs {
                runs += 1;
                match out {
                    Some(o) => {
                        iter_depth = iter_depth.max(o.depth);
                        work = work.saturating_add(o.tally.work());
                        tally.merge(&o.tally);
                        f.absorb_raw(n, o.raw);
                    }
                    None => {
                        aborted += 1;
                        iter_aborted += 1;
                        work = work.saturating_add(work_budget);
                    }
                }
            }
        }
        // One unit for merging the new edges into the graph.
        iter_depth += 1;
        depth += iter_depth;
        iterations.push(IterationSummary {
            depth: iter_depth,
            runs: inner as u64,
            aborted: iter_aborted,
            shortcuts_total: f.len() as u64,
        });
        if i + 1 == outer {
            break;
        }
        if let Some(pairs) = closure_pairs {
            let extra = original_nonself.iter().filter(|&&(u, v)| !f.contains(u, v)).count();
            if (f.len() + extra) as u64 == pairs {
                skipped = (outer - i - 1) as u64;
                break;
            }
        }
        working = Some(f.augment(g));
    }

    let mut metrics = DepthMetrics::from_tally(&tally, depth, f.len());
    metrics.work = work;
    metrics.runs = runs;
    metrics.aborted_runs = aborted;
    metrics.skipped_outer_iterations = skipped;
    Ok(DiamOutput {
        shortcuts: f,
        metrics,
        work_budget,
        shortcut_budget,
        iterations,
    })
}

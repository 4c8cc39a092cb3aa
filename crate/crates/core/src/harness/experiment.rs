use std::fs::OpenOptions;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::congest::{communication_component, distr_reach, Alpha, DistrConfig, Network, RedrawMode, RoundLedger};
use crate::exec::{map_vec, ExecMode};
use crate::graph::{read_edge_list, transitive_closure_oracle, Digraph, Direction, OracleConfig, ReachMatrix, Traversal, Vertex, DEFAULT_ORACLE_CAP};
use crate::metrics::{DepthMetrics, WorkMetrics};
use crate::parallel::{parallel_diam_with, BudgetMode, DiamConfig, ScaleOverride};
use crate::reach::{estimate_diameter, estimate_diameter_with, reach_with_config, union_distance};
use crate::seq::{seq_shortcut, seq_shortcut_whp};
use crate::shortcut::ShortcutSet;

use super::{generate, GeneratorSpec, HarnessError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Seq,
    SeqWhp,
    ParallelDiam,
    Reach,
    Congest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    /// Edge-list file used instead of the generator when set.
    pub input: Option<PathBuf>,
    pub algorithm: Algorithm,
    pub k: u32,
    /// Repetitions for `seq_whp`; `None` is `ceil(log2 n)`.
    pub repetitions: Option<usize>,
    pub seeds: Vec<u64>,
    /// JSON-lines file the records are appended to.
    pub output: Option<PathBuf>,
    pub oracle_checks: bool,
    pub oracle_cap: usize,
    pub exec: ExecMode,
    pub scale_override: Option<ScaleOverride>,
    /// Calibrate abort budgets from this many unbounded runs.
    pub calibrate: Option<usize>,
    /// Source for `reach` and `congest`.
    pub source: Vertex,
    /// Sources sampled for the diameter estimates; 0 skips them.
    pub diameter_samples: usize,
    pub alpha: Alpha,
}

impl ExperimentConfig {
    pub fn new(generator: GeneratorSpec, algorithm: Algorithm, k: u32, seeds: Vec<u64>) -> Self {
        ExperimentConfig {
            generator,
            input: None,
            algorithm,
            k,
            repetitions: None,
            seeds,
            output: None,
            oracle_checks: false,
            oracle_cap: DEFAULT_ORACLE_CAP,
            exec: ExecMode::Sequential,
            scale_override: None,
            calibrate: None,
            source: 0,
            diameter_samples: 0,
            alpha: Alpha::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachSummary {
    pub source: Vertex,
    pub reached_count: usize,
    pub bfs_levels: u32,
    pub bfs_levels_before: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongestSummary {
    pub source: Vertex,
    /// Vertices weakly connected to the source; the network is built on them.
    pub component_size: usize,
    pub hop_diameter: u32,
    pub alpha: u64,
    pub hubs: usize,
    pub h: u64,
    pub skeleton_edges: usize,
    pub broadcasts: u64,
    pub redraws: u32,
    pub total_rounds: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub k: u32,
    pub shortcuts_added: u64,
    pub work: Option<WorkMetrics>,
    pub depth: Option<DepthMetrics>,
    pub rounds: Option<RoundLedger>,
    pub reach: Option<ReachSummary>,
    pub congest: Option<CongestSummary>,
    /// Sampled eccentricity lower bounds of `G` and `G ∪ F`.
    pub diameter_before: Option<u32>,
    pub diameter_after: Option<u32>,
    /// Distance from vertex 0 to vertex n-1 for path-shaped families.
    pub head_tail_before: Option<u32>,
    pub head_tail_after: Option<u32>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub config: ExperimentConfig,
    pub wall_time_us: u64,
}

impl MetricsRecord {
    /// Copy with the wall time zeroed, for determinism comparisons.
    pub fn without_wall_time(&self) -> Self {
        MetricsRecord {
            wall_time_us: 0,
            ..self.clone()
        }
    }
}

fn validate(cfg: &ExperimentConfig, g: &Digraph) -> Result<(), HarnessError> {
    if cfg.k < 2 {
        return Err(HarnessError::Config(format!("k must be at least 2, got {}", cfg.k)));
    }
    if cfg.repetitions == Some(0) {
        return Err(HarnessError::Config("repetitions must be at least 1".into()));
    }
    if cfg.oracle_checks && g.vertex_count() > cfg.oracle_cap {
        return Err(HarnessError::Config(format!(
            "oracle checks need n <= {}, got n = {}",
            cfg.oracle_cap,
            g.vertex_count()
        )));
    }
    if matches!(cfg.algorithm, Algorithm::Reach | Algorithm::Congest) && cfg.source as usize >= g.vertex_count() {
        return Err(HarnessError::Config(format!("source {} out of range", cfg.source)));
    }
    if let Alpha::Fixed(a) = cfg.alpha {
        if a == 0 {
            return Err(HarnessError::Config("alpha must be at least 1".into()));
        }
    }
    Ok(())
}

fn shortcut_checks(g: &Digraph, f: &ShortcutSet, oracle: &ReachMatrix, checks: &mut Vec<Check>) {
    let unsound: Vec<(Vertex, Vertex)> = f.pairs().filter(|&(u, w)| !oracle.get(u, w)).take(5).collect();
    checks.push(Check {
        name: "soundness".into(),
        passed: unsound.is_empty(),
        detail: if unsound.is_empty() {
            String::new()
        } else {
            format!("shortcuts without a path: {unsound:?}")
        },
    });
    let after = transitive_closure_oracle(&f.augment(g), &OracleConfig { cap: usize::MAX }).expect("no cap");
    let same = &after == oracle;
    checks.push(Check {
        name: "preservation".into(),
        passed: same,
        detail: if same {
            String::new()
        } else {
            format!("closure grew from {} to {} pairs", oracle.count(), after.count())
        },
    });
}

fn row_check(name: &str, got: impl Fn(Vertex) -> bool, oracle: &ReachMatrix, s: Vertex, n: usize) -> Check {
    let wrong: Vec<Vertex> = (0..n as Vertex).filter(|&v| got(v) != oracle.get(s, v)).take(5).collect();
    Check {
        name: name.into(),
        passed: wrong.is_empty(),
        detail: if wrong.is_empty() {
            String::new()
        } else {
            format!("wrong answers at {wrong:?}")
        },
    }
}

fn run_seed(cfg: &ExperimentConfig, g: &Digraph, oracle: Option<&ReachMatrix>, seed: u64) -> MetricsRecord {
    let start = Instant::now();
    let n = g.vertex_count();
    let mut rec = MetricsRecord {
        algorithm: cfg.algorithm,
        seed,
        n,
        m: g.edge_count(),
        k: cfg.k,
        shortcuts_added: 0,
        work: None,
        depth: None,
        rounds: None,
        reach: None,
        congest: None,
        diameter_before: None,
        diameter_after: None,
        head_tail_before: None,
        head_tail_after: None,
        checks: Vec::new(),
        passed: true,
        config: cfg.clone(),
        wall_time_us: 0,
    };
    let mut dcfg = DiamConfig::new(cfg.k);
    dcfg.par.exec = cfg.exec;
    dcfg.par.scale_override = cfg.scale_override;
    if let Some(runs) = cfg.calibrate {
        dcfg.budget_mode = BudgetMode::Calibrated { runs };
    }

    let shortcuts = match cfg.algorithm {
        Algorithm::Seq | Algorithm::SeqWhp => {
            let (f, m) = if cfg.algorithm == Algorithm::Seq {
                seq_shortcut(g, cfg.k, seed)
            } else {
                seq_shortcut_whp(g, cfg.k, cfg.repetitions, seed, cfg.exec)
            }
            .expect("parameters validated");
            rec.work = Some(m);
            Some(f)
        }
        Algorithm::ParallelDiam => {
            let out = parallel_diam_with(g, seed, &dcfg).expect("parameters validated");
            rec.depth = Some(out.metrics);
            Some(out.shortcuts)
        }
        Algorithm::Reach => {
            let res = reach_with_config(g, cfg.source, seed, &dcfg).expect("parameters validated");
            rec.checks.push(Check {
                name: "levels_not_worse".into(),
                passed: res.bfs_levels <= res.bfs_levels_before,
                detail: format!("{} vs {}", res.bfs_levels, res.bfs_levels_before),
            });
            if let Some(o) = oracle {
                rec.checks.push(row_check("reach_exact", |v| res.reached.contains(v), o, cfg.source, n));
            }
            rec.shortcuts_added = res.metrics.shortcuts_added;
            rec.reach = Some(ReachSummary {
                source: cfg.source,
                reached_count: res.reached_count,
                bfs_levels: res.bfs_levels,
                bfs_levels_before: res.bfs_levels_before,
            });
            rec.depth = Some(res.metrics);
            None
        }
        Algorithm::Congest => {
            let comp = communication_component(g, cfg.source);
            let sub = g.induced(&comp);
            let local_s = comp.binary_search(&cfg.source).expect("source in its component") as Vertex;
            let net = Network::new(&sub).expect("component is connected");
            let dc = DistrConfig {
                alpha: cfg.alpha,
                k: None,
                mode: if oracle.is_some() {
                    RedrawMode::Test { max_redraws: 20 }
                } else {
                    RedrawMode::Production
                },
                exec: cfg.exec,
            };
            match distr_reach(&net, local_s, &dc, seed) {
                Ok(out) => {
                    if let Some(o) = oracle {
                        let mut bits = vec![false; n];
                        for (i, &v) in comp.iter().enumerate() {
                            bits[v as usize] = out.reachable[i];
                        }
                        rec.checks.push(row_check("congest_exact", |v| bits[v as usize], o, cfg.source, n));
                    }
                    rec.congest = Some(CongestSummary {
                        source: cfg.source,
                        component_size: comp.len(),
                        hop_diameter: net.hop_diameter(),
                        alpha: out.alpha,
                        hubs: out.hubs,
                        h: out.h,
                        skeleton_edges: out.skeleton_edges,
                        broadcasts: out.broadcasts,
                        redraws: out.redraws,
                        total_rounds: out.ledger.total(),
                    });
                    rec.rounds = Some(out.ledger);
                    rec.depth = Some(out.diam);
                }
                Err(e) => rec.checks.push(Check {
                    name: "congest_run".into(),
                    passed: false,
                    detail: e.to_string(),
                }),
            }
            None
        }
    };

    if let Some(f) = &shortcuts {
        rec.shortcuts_added = f.len() as u64;
        if let Some(o) = oracle {
            shortcut_checks(g, f, o, &mut rec.checks);
        }
        if cfg.input.is_none() && cfg.generator.family.has_spine() && n > 1 {
            let mut t = Traversal::new(n);
            t.run(g, 0, Direction::Forward, None);
            rec.head_tail_before = t.distance(n as Vertex - 1);
            rec.head_tail_after = union_distance(g, f, 0, n as Vertex - 1);
        }
        if cfg.diameter_samples > 0 {
            rec.diameter_before = Some(estimate_diameter(g, cfg.diameter_samples, seed));
            rec.diameter_after = Some(estimate_diameter_with(g, f, cfg.diameter_samples, seed));
        }
    } else if cfg.diameter_samples > 0 {
        rec.diameter_before = Some(estimate_diameter(g, cfg.diameter_samples, seed));
    }
    rec.passed = rec.checks.iter().all(|c| c.passed);
    rec.wall_time_us = start.elapsed().as_micros() as u64;
    rec
}

/// The configured input file, or else the generated graph.
pub fn load_graph(cfg: &ExperimentConfig) -> Result<Digraph, HarnessError> {
    match &cfg.input {
        Some(path) => {
            let file = std::fs::File::open(path)?;
            read_edge_list(std::io::BufReader::new(file)).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
        }
        None => generate(&cfg.generator),
    }
}

/// One record per seed, in seed order. Failed checks are recorded and the
/// run moves on; configuration problems are errors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRecord>, HarnessError> {
    let g = load_graph(cfg)?;
    validate(cfg, &g)?;
    if cfg.seeds.is_empty() {
        return Ok(Vec::new());
    }
    let oracle = if cfg.oracle_checks {
        Some(transitive_closure_oracle(&g, &OracleConfig { cap: cfg.oracle_cap }).map_err(|e| HarnessError::Config(e.to_string()))?)
    } else {
        None
    };
    let records = map_vec(cfg.exec, cfg.seeds.clone(), |s| run_seed(cfg, &g, oracle.as_ref(), s));
    if let Some(path) = &cfg.output {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut w = BufWriter::new(file);
        for r in &records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    Ok(records)
}

/// Reads a JSON-lines file of records.
pub fn read_records(path: &std::path::Path) -> Result<Vec<MetricsRecord>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(HarnessError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Family;

    fn path_spec(n: usize) -> GeneratorSpec {
        GeneratorSpec {
            family: Family::Path,
            n,
            seed: 0,
        }
    }

    #[test]
    fn seq_on_p16_passes_oracle() {
        let mut cfg = ExperimentConfig::new(path_spec(16), Algorithm::Seq, 2, vec![1]);
        cfg.oracle_checks = true;
        let recs = run_experiment(&cfg).unwrap();
        assert_eq!(recs.len(), 1);
        let pres = recs[0].checks.iter().find(|c| c.name == "preservation").unwrap();
        assert!(pres.passed);
        assert!(recs[0].passed);
        assert_eq!(recs[0].head_tail_before, Some(15));
    }

    #[test]
    fn empty_seed_list() {
        let cfg = ExperimentConfig::new(path_spec(8), Algorithm::Seq, 2, vec![]);
        assert!(run_experiment(&cfg).unwrap().is_empty());
    }

    #[test]
    fn config_errors() {
        let cfg = ExperimentConfig::new(path_spec(8), Algorithm::Seq, 1, vec![0]);
        assert!(matches!(run_experiment(&cfg), Err(HarnessError::Config(_))));
        let mut cfg = ExperimentConfig::new(path_spec(600), Algorithm::Seq, 2, vec![0]);
        cfg.oracle_checks = true;
        assert!(matches!(run_experiment(&cfg), Err(HarnessError::Config(_))));
    }

    #[test]
    fn every_algorithm_round_trips() {
        for alg in [
            Algorithm::Seq,
            Algorithm::SeqWhp,
            Algorithm::ParallelDiam,
            Algorithm::Reach,
            Algorithm::Congest,
        ] {
            let mut cfg = ExperimentConfig::new(path_spec(12), alg, 3, vec![4, 5]);
            cfg.oracle_checks = true;
            cfg.diameter_samples = 3;
            let recs = run_experiment(&cfg).unwrap();
            for r in &recs {
                assert!(r.passed, "{alg:?}: {:?}", r.checks);
                let json = serde_json::to_string(r).unwrap();
                assert_eq!(&serde_json::from_str::<MetricsRecord>(&json).unwrap(), r);
            }
            let again = run_experiment(&cfg).unwrap();
            let strip = |v: &[MetricsRecord]| v.iter().map(|r| r.without_wall_time()).collect::<Vec<_>>();
            assert_eq!(strip(&recs), strip(&again));
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hopset_core::congest::{communication_component, distr_reach_traced, Alpha, DistrConfig, Network};
use hopset_core::graph::{exact_diameter, write_edge_list, OracleConfig, DEFAULT_ORACLE_CAP};
use hopset_core::harness::{
    fit_records, generate, load_graph, read_records, run_experiment, write_csv, Algorithm, ExperimentConfig, Family,
    GeneratorSpec, HarnessError, MetricsRecord,
};
use hopset_core::parallel::ScaleOverride;
use hopset_core::reach::{default_k, estimate_diameter};
use hopset_core::ExecMode;

#[derive(Parser)]
#[command(name = "hopset", version, about = "Shortcut construction and reachability experiments")]
struct Cli {
    /// Seeds, comma separated; one record per seed.
    #[arg(long, global = true, value_delimiter = ',', default_value = "0")]
    seed: Vec<u64>,
    /// Shortcut parameter; defaults to max(2, ceil(log2 n)).
    #[arg(long, global = true)]
    k: Option<u32>,
    /// Output file. Records are appended as JSON lines; `generate` writes an edge list.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Check every result against the brute-force oracle.
    #[arg(long, global = true)]
    oracle: bool,
    #[arg(long, global = true, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
    /// Test only: `D,KMIN,KMAX` replaces the search scale and multiplier range.
    #[arg(long, global = true, value_parser = parse_override)]
    scale_override: Option<ScaleOverride>,
    /// Calibrate abort budgets from this many unbounded runs.
    #[arg(long, global = true)]
    calibrate: Option<usize>,
    /// Run seeds and independent subproblems on the thread pool.
    #[arg(long, global = true)]
    concurrent: bool,
    /// Print records as CSV instead of JSON lines.
    #[arg(long, global = true)]
    csv: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Path,
    RandomDag,
    LayeredGrid,
    PathPlusRandom,
    CompleteDag,
    Cycle,
    RandomDigraph,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Edge-list file; overrides the generator.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "path")]
    family: FamilyName,
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Edge probability for random families.
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Grid width; depth is n / width.
    #[arg(long)]
    width: Option<usize>,
    #[arg(long, default_value_t = 0)]
    extra_edges: usize,
    /// Generator seed, independent of the algorithm seeds.
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
}

impl GraphArgs {
    fn spec(&self) -> anyhow::Result<GeneratorSpec> {
        let family = match self.family {
            FamilyName::Path => Family::Path,
            FamilyName::RandomDag => Family::RandomDag { p: self.p },
            FamilyName::LayeredGrid => {
                let width = self.width.ok_or_else(|| anyhow!(HarnessError::Config("--width is required".into())))?;
                if width == 0 || self.n % width != 0 {
                    return Err(HarnessError::Config(format!("--width {width} does not divide n = {}", self.n)).into());
                }
                Family::LayeredGrid {
                    width,
                    depth: self.n / width,
                }
            }
            FamilyName::PathPlusRandom => Family::PathPlusRandom {
                extra_edges: self.extra_edges,
            },
            FamilyName::CompleteDag => Family::CompleteDag,
            FamilyName::Cycle => Family::Cycle,
            FamilyName::RandomDigraph => Family::RandomDigraph { p: self.p },
        };
        Ok(GeneratorSpec {
            family,
            n: self.n,
            seed: self.graph_seed,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgName {
    Seq,
    SeqWhp,
    ParallelDiam,
    Reach,
    Congest,
}

impl From<AlgName> for Algorithm {
    fn from(a: AlgName) -> Self {
        match a {
            AlgName::Seq => Algorithm::Seq,
            AlgName::SeqWhp => Algorithm::SeqWhp,
            AlgName::ParallelDiam => Algorithm::ParallelDiam,
            AlgName::Reach => Algorithm::Reach,
            AlgName::Congest => Algorithm::Congest,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated graph as an edge list.
    Generate(GraphArgs),
    /// Sequential shortcuts.
    ShortcutSeq {
        #[command(flatten)]
        graph: GraphArgs,
        /// Union of independent repetitions.
        #[arg(long)]
        whp: bool,
        /// Repetitions for `--whp`; defaults to ceil(log2 n).
        #[arg(long)]
        repetitions: Option<usize>,
        #[arg(long, default_value_t = 0)]
        diameter_samples: usize,
    },
    /// Parallel diameter reduction.
    ShortcutPar {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0)]
        diameter_samples: usize,
    },
    /// Single-source reachability over the shortcut graph.
    Reach {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0)]
        source: u32,
    },
    /// Round-level simulation of the distributed reachability protocol.
    Congest {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0)]
        source: u32,
        /// Fixed hub parameter; automatic when absent.
        #[arg(long)]
        alpha: Option<u64>,
        /// Per-round event log for the first seed.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Diameter estimate, or the exact value with `--oracle`.
    Diameter {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Sweep graph sizes and optionally fit a growth exponent.
    Bench {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum)]
        algorithm: AlgName,
        /// Sizes to run, comma separated; replaces --n.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        repetitions: Option<usize>,
        #[arg(long, default_value_t = 0)]
        diameter_samples: usize,
        /// Field to fit against n after the sweep.
        #[arg(long)]
        fit: Option<String>,
    },
    /// Log-log fit of a record field against n.
    Fit {
        /// JSON-lines records.
        records: PathBuf,
        #[arg(long)]
        field: String,
    },
}

fn parse_override(s: &str) -> Result<ScaleOverride, String> {
    let parts: Vec<u64> = s
        .split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| format!("{p}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [search_scale, kappa_min, kappa_max] if search_scale >= 1 && 1 <= kappa_min && kappa_min <= kappa_max => {
            Ok(ScaleOverride {
                search_scale,
                kappa_min,
                kappa_max,
            })
        }
        _ => Err("expected D,KMIN,KMAX with D >= 1 and 1 <= KMIN <= KMAX".into()),
    }
}

/// A failed check, as opposed to a configuration problem.
struct ChecksFailed;

struct Ctx<'a> {
    cli: &'a Cli,
}

impl Ctx<'_> {
    fn exec(&self) -> ExecMode {
        if self.cli.concurrent {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }

    fn config(&self, graph: &GraphArgs, algorithm: Algorithm) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(graph.spec()?, algorithm, 0, self.cli.seed.clone());
        cfg.input = graph.input.clone();
        cfg.k = match self.cli.k {
            Some(k) => k,
            None => default_k(load_graph(&cfg)?.vertex_count()),
        };
        cfg.output = self.cli.out.clone();
        cfg.oracle_checks = self.cli.oracle;
        cfg.oracle_cap = self.cli.oracle_cap;
        cfg.exec = self.exec();
        cfg.scale_override = self.cli.scale_override;
        cfg.calibrate = self.cli.calibrate;
        Ok(cfg)
    }

    fn emit(&self, records: &[MetricsRecord]) -> anyhow::Result<Result<(), ChecksFailed>> {
        let stdout = io::stdout();
        let mut w = stdout.lock();
        if self.cli.csv {
            write_csv(records, &mut w)?;
        } else {
            for r in records {
                serde_json::to_writer(&mut w, r)?;
                writeln!(w)?;
            }
        }
        for r in records.iter().filter(|r| !r.passed) {
            for c in r.checks.iter().filter(|c| !c.passed) {
                eprintln!("seed {}: check {} failed: {}", r.seed, c.name, c.detail);
            }
        }
        Ok(if records.iter().all(|r| r.passed) {
            Ok(())
        } else {
            Err(ChecksFailed)
        })
    }

    fn experiment(&self, cfg: &ExperimentConfig) -> anyhow::Result<Result<(), ChecksFailed>> {
        let records = run_experiment(cfg)?;
        self.emit(&records)
    }
}

fn run(cli: &Cli) -> anyhow::Result<Result<(), ChecksFailed>> {
    let ctx = Ctx { cli };
    match &cli.cmd {
        Cmd::Generate(graph) => {
            let g = generate(&graph.spec()?)?;
            match &cli.out {
                Some(path) => {
                    let f = File::create(path).with_context(|| path.display().to_string())?;
                    let mut w = BufWriter::new(f);
                    write_edge_list(&g, &mut w)?;
                    w.flush()?;
                }
                None => write_edge_list(&g, io::stdout().lock())?,
            }
            Ok(Ok(()))
        }
        Cmd::ShortcutSeq {
            graph,
            whp,
            repetitions,
            diameter_samples,
        } => {
            let alg = if *whp { Algorithm::SeqWhp } else { Algorithm::Seq };
            let mut cfg = ctx.config(graph, alg)?;
            cfg.repetitions = *repetitions;
            cfg.diameter_samples = *diameter_samples;
            ctx.experiment(&cfg)
        }
        Cmd::ShortcutPar { graph, diameter_samples } => {
            let mut cfg = ctx.config(graph, Algorithm::ParallelDiam)?;
            cfg.diameter_samples = *diameter_samples;
            ctx.experiment(&cfg)
        }
        Cmd::Reach { graph, source } => {
            let mut cfg = ctx.config(graph, Algorithm::Reach)?;
            cfg.source = *source;
            ctx.experiment(&cfg)
        }
        Cmd::Congest {
            graph,
            source,
            alpha,
            trace,
        } => {
            let mut cfg = ctx.config(graph, Algorithm::Congest)?;
            cfg.source = *source;
            cfg.alpha = alpha.map_or(Alpha::Auto, Alpha::Fixed);
            let status = ctx.experiment(&cfg)?;
            if let (Some(path), Some(&seed)) = (trace, cfg.seeds.first()) {
                let g = load_graph(&cfg)?;
                let comp = communication_component(&g, cfg.source);
                let sub = g.induced(&comp);
                let local = comp.binary_search(&cfg.source).expect("source in its component") as u32;
                let net = Network::new(&sub)?;
                let dc = DistrConfig {
                    alpha: cfg.alpha,
                    exec: cfg.exec,
                    ..DistrConfig::default()
                };
                let mut w = BufWriter::new(File::create(path).with_context(|| path.display().to_string())?);
                distr_reach_traced(&net, local, &dc, seed, &mut w)??;
                w.flush()?;
            }
            Ok(status)
        }
        Cmd::Diameter { graph, samples } => {
            let mut cfg = ExperimentConfig::new(graph.spec()?, Algorithm::Seq, 2, vec![]);
            cfg.input = graph.input.clone();
            let g = load_graph(&cfg)?;
            let mut out = serde_json::json!({
                "n": g.vertex_count(),
                "m": g.edge_count(),
            });
            if cli.oracle {
                let d = exact_diameter(&g, &OracleConfig { cap: cli.oracle_cap })
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                out["exact"] = d.into();
            }
            let est: Vec<u32> = cli.seed.iter().map(|&s| estimate_diameter(&g, *samples, s)).collect();
            out["estimate"] = est.into_iter().max().unwrap_or(0).into();
            println!("{out}");
            Ok(Ok(()))
        }
        Cmd::Bench {
            graph,
            algorithm,
            sizes,
            repetitions,
            diameter_samples,
            fit,
        } => {
            let mut all = Vec::new();
            for &n in sizes {
                let mut g = graph.clone();
                g.n = n;
                let mut cfg = ctx.config(&g, (*algorithm).into())?;
                cfg.repetitions = *repetitions;
                cfg.diameter_samples = *diameter_samples;
                all.extend(run_experiment(&cfg)?);
            }
            let status = ctx.emit(&all)?;
            if let Some(field) = fit {
                let f = fit_records(&all, field)?;
                eprintln!("{}", serde_json::to_string(&f)?);
            }
            Ok(status)
        }
        Cmd::Fit { records, field } => {
            let recs = read_records(records)?;
            let f = fit_records(&recs, field)?;
            println!("{}", serde_json::to_string(&f)?);
            Ok(Ok(()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(ChecksFailed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

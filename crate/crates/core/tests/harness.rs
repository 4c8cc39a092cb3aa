use hopset_core::harness::{
    fit_records, generate, record_field, read_records, run_experiment, write_csv, Algorithm, ExperimentConfig, Family, GeneratorSpec,
    HarnessError,
};
use hopset_core::graph::{read_edge_list, write_edge_list};

fn spec(family: Family, n: usize) -> GeneratorSpec {
    GeneratorSpec { family, n, seed: 3 }
}

#[test]
fn records_append_and_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.jsonl");
    let mut cfg = ExperimentConfig::new(spec(Family::RandomDag { p: 0.1 }, 40), Algorithm::Seq, 3, vec![1, 2]);
    cfg.output = Some(path.clone());
    cfg.oracle_checks = true;
    let first = run_experiment(&cfg).unwrap();
    let second = run_experiment(&cfg).unwrap();
    let back = read_records(&path).unwrap();
    assert_eq!(back.len(), 4);
    assert_eq!(back[..2], first[..]);
    assert_eq!(back[2..], second[..]);
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a.without_wall_time(), b.without_wall_time());
    }
}

#[test]
fn fit_over_a_sweep() {
    let mut recs = Vec::new();
    for n in [64, 128, 256, 512] {
        let cfg = ExperimentConfig::new(spec(Family::Path, n), Algorithm::ParallelDiam, 4, vec![0, 1]);
        recs.extend(run_experiment(&cfg).unwrap());
    }
    let f = fit_records(&recs, "logical_depth").unwrap();
    assert_eq!(f.points, 4);
    assert!(f.slope > 0.0 && f.slope < 2.0, "{f:?}");
    assert!(matches!(fit_records(&recs[..4], "logical_depth"), Err(HarnessError::Config(_))));
    // top-level `work` is null here, so the bare name falls through to `depth.work`
    assert_eq!(record_field(&recs[0], "work"), record_field(&recs[0], "depth.work"));
    assert!(record_field(&recs[0], "work.edge_scans").is_none());
    assert_eq!(record_field(&recs[0], "depth.work"), recs[0].depth.as_ref().map(|d| d.work as f64));
    assert!(record_field(&recs[0], "depth.nope").is_none());
}

#[test]
fn csv_rows_match_records() {
    let cfg = ExperimentConfig::new(spec(Family::Cycle, 30), Algorithm::Reach, 2, vec![5, 6, 7]);
    let recs = run_experiment(&cfg).unwrap();
    let mut buf = Vec::new();
    write_csv(&recs, &mut buf).unwrap();
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "reach.reached_count").unwrap();
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| &r[col] == "30"));
}

#[test]
fn generated_graphs_survive_the_edge_list_format() {
    for family in [
        Family::Path,
        Family::RandomDag { p: 0.2 },
        Family::LayeredGrid { width: 4, depth: 5 },
        Family::PathPlusRandom { extra_edges: 7 },
        Family::CompleteDag,
        Family::Cycle,
        Family::RandomDigraph { p: 0.1 },
    ] {
        let g = generate(&spec(family, 20)).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(read_edge_list(buf.as_slice()).unwrap(), g, "{}", family.name());
    }
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::Digraph;
use crate::rng::{derive_seed, rng, tag};

use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `0 -> 1 -> ... -> n-1`.
    Path,
    /// Each forward pair `i < j` independently with probability `p`.
    RandomDag { p: f64 },
    /// `depth` rows of `width` vertices; edges go right and down.
    LayeredGrid { width: usize, depth: usize },
    /// A path plus `extra_edges` uniform random ordered pairs.
    PathPlusRandom { extra_edges: usize },
    CompleteDag,
    Cycle,
    /// Each ordered pair `u != v` independently with probability `p`.
    RandomDigraph { p: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Path => "path",
            Family::RandomDag { .. } => "random_dag",
            Family::LayeredGrid { .. } => "layered_grid",
            Family::PathPlusRandom { .. } => "path_plus_random",
            Family::CompleteDag => "complete_dag",
            Family::Cycle => "cycle",
            Family::RandomDigraph { .. } => "random_digraph",
        }
    }

    /// Families whose vertex 0 to vertex n-1 is a designated long path.
    pub fn has_spine(&self) -> bool {
        matches!(self, Family::Path | Family::PathPlusRandom { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

fn check_p(p: f64) -> Result<(), HarnessError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("edge probability {p} outside [0, 1]")))
    }
}

/// Deterministic per seed.
pub fn generate(spec: &GeneratorSpec) -> Result<Digraph, HarnessError> {
    let n = spec.n;
    if n == 0 {
        return Err(HarnessError::Config("n must be at least 1".into()));
    }
    let mut r = rng(derive_seed(spec.seed, tag::SAMPLE, n as u64));
    let path = || (1..n).map(|i| (i - 1, i));
    let edges: Vec<(usize, usize)> = match spec.family {
        Family::Path => path().collect(),
        Family::RandomDag { p } => {
            check_p(p)?;
            let mut e = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if r.gen::<f64>() < p {
                        e.push((i, j));
                    }
                }
            }
            e
        }
        Family::LayeredGrid { width, depth } => {
            if width == 0 || depth == 0 || width.checked_mul(depth) != Some(n) {
                return Err(HarnessError::Config(format!(
                    "layered grid {width}x{depth} does not have n = {n} vertices"
                )));
            }
            let mut e = Vec::new();
            for l in 0..depth {
                for c in 0..width {
                    let v = l * width + c;
                    if c + 1 < width {
                        e.push((v, v + 1));
                    }
                    if l + 1 < depth {
                        e.push((v, v + width));
                    }
                }
            }
            e
        }
        Family::PathPlusRandom { extra_edges } => {
            let mut e: Vec<(usize, usize)> = path().collect();
            if n > 1 {
                for _ in 0..extra_edges {
                    let u = r.gen_range(0..n);
                    let mut v = r.gen_range(0..n - 1);
                    if v >= u {
                        v += 1;
                    }
                    e.push((u, v));
                }
            }
            e
        }
        Family::CompleteDag => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        Family::Cycle => {
            let mut e: Vec<(usize, usize)> = path().collect();
            if n > 1 {
                e.push((n - 1, 0));
            }
            e
        }
        Family::RandomDigraph { p } => {
            check_p(p)?;
            let mut e = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && r.gen::<f64>() < p {
                        e.push((i, j));
                    }
                }
            }
            e
        }
    };
    Digraph::new(n, edges).map_err(|e| HarnessError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{exact_diameter, strongly_connected_components, OracleConfig};

    fn spec(family: Family, n: usize, seed: u64) -> GeneratorSpec {
        GeneratorSpec { family, n, seed }
    }

    #[test]
    fn path_five() {
        let g = generate(&spec(Family::Path, 5, 0)).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(exact_diameter(&g, &OracleConfig::default()).unwrap(), 4);
    }

    #[test]
    fn dag_extremes() {
        assert_eq!(generate(&spec(Family::RandomDag { p: 0.0 }, 10, 1)).unwrap().edge_count(), 0);
        let g = generate(&spec(Family::RandomDag { p: 1.0 }, 6, 1)).unwrap();
        assert_eq!(g.edge_count(), 15);
        assert_eq!(exact_diameter(&g, &OracleConfig::default()).unwrap(), 1);
        assert_eq!(g, generate(&spec(Family::CompleteDag, 6, 9)).unwrap());
    }

    #[test]
    fn random_dag_is_acyclic_and_deterministic() {
        for seed in 0..20 {
            let s = spec(Family::RandomDag { p: 0.3 }, 30, seed);
            let g = generate(&s).unwrap();
            assert_eq!(strongly_connected_components(&g).count, 30);
            assert!(g.edges().all(|(u, v)| u < v));
            assert_eq!(g, generate(&s).unwrap());
        }
    }

    #[test]
    fn grid_shape() {
        let g = generate(&spec(Family::LayeredGrid { width: 3, depth: 4 }, 12, 0)).unwrap();
        assert_eq!(g.edge_count(), 4 * 2 + 3 * 3);
        assert_eq!(exact_diameter(&g, &OracleConfig::default()).unwrap(), 5);
        assert!(generate(&spec(Family::LayeredGrid { width: 3, depth: 4 }, 13, 0)).is_err());
    }

    #[test]
    fn bad_parameters() {
        assert!(generate(&spec(Family::RandomDag { p: 1.5 }, 4, 0)).is_err());
        assert!(generate(&spec(Family::Path, 0, 0)).is_err());
    }

    #[test]
    fn cycle_is_strongly_connected() {
        let g = generate(&spec(Family::Cycle, 7, 0)).unwrap();
        assert_eq!(strongly_connected_components(&g).count, 1);
        let one = generate(&spec(Family::Cycle, 1, 0)).unwrap();
        assert_eq!(one.edge_count(), 0);
    }

    #[test]
    fn spec_serializes_flat() {
        let s = spec(Family::RandomDag { p: 0.25 }, 10, 3);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"family":"random_dag","p":0.25,"n":10,"seed":3}"#);
        assert_eq!(serde_json::from_str::<GeneratorSpec>(&json).unwrap(), s);
    }
}

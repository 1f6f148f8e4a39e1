//! Seeded generators for graph families with a known excluded clique minor.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, WeightedGraph};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("unknown family {0:?} (expected grid, tree, series-parallel or planar-triangulation)")]
    UnknownFamily(String),
    #[error("unknown weight mode {0:?} (expected unit, uniform:LO:HI or exponential)")]
    UnknownWeights(String),
    #[error("size must be at least 1")]
    ZeroSize,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Grid,
    Tree,
    SeriesParallel,
    PlanarTriangulation,
}

impl Family {
    /// Size of the smallest excluded clique minor for the family.
    pub fn excluded_minor(self) -> usize {
        match self {
            Family::Tree => 3,
            Family::SeriesParallel => 4,
            Family::Grid | Family::PlanarTriangulation => 5,
        }
    }
}

impl FromStr for Family {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, GenError> {
        match s {
            "grid" => Ok(Family::Grid),
            "tree" => Ok(Family::Tree),
            "series-parallel" | "sp" => Ok(Family::SeriesParallel),
            "planar-triangulation" | "planar" => Ok(Family::PlanarTriangulation),
            other => Err(GenError::UnknownFamily(other.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Grid => "grid",
            Family::Tree => "tree",
            Family::SeriesParallel => "series-parallel",
            Family::PlanarTriangulation => "planar-triangulation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    Unit,
    Uniform { lo: f64, hi: f64 },
    /// `2^U` with `U` uniform in `[0, 20]`.
    ExponentialSpread,
}

impl FromStr for WeightMode {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, GenError> {
        let bad = || GenError::UnknownWeights(s.to_string());
        match s {
            "unit" => Ok(WeightMode::Unit),
            "exponential" | "exponential-spread" | "exp" => Ok(WeightMode::ExponentialSpread),
            _ => {
                let rest = s.strip_prefix("uniform:").ok_or_else(bad)?;
                let (lo, hi) = rest.split_once(':').ok_or_else(bad)?;
                let lo: f64 = lo.parse().map_err(|_| bad())?;
                let hi: f64 = hi.parse().map_err(|_| bad())?;
                if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
                    return Err(bad());
                }
                Ok(WeightMode::Uniform { lo, hi })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub size: usize,
    pub weights: WeightMode,
    pub seed: u64,
}

/// One step of a two-terminal series-parallel construction, replayable from a
/// single edge `0 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpStep {
    /// Edge `(u, v)` replaced by the path `u - new - v`.
    Series { u: usize, v: usize, new: usize },
    /// Path `u - new - v` added next to the existing edge `(u, v)`.
    Parallel { u: usize, v: usize, new: usize },
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: WeightedGraph,
    pub r: usize,
    pub sp_trace: Option<Vec<SpStep>>,
}

pub fn generate(spec: &FamilySpec) -> Result<Generated, GenError> {
    if spec.size == 0 {
        return Err(GenError::ZeroSize);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sp_trace = None;
    let (n, pairs) = match spec.family {
        Family::Grid => grid_edges(spec.size),
        Family::Tree => tree_edges(spec.size, &mut rng),
        Family::SeriesParallel => {
            let (n, pairs, trace) = series_parallel_edges(spec.size, &mut rng);
            sp_trace = Some(trace);
            (n, pairs)
        }
        Family::PlanarTriangulation => triangulation_edges(spec.size, &mut rng),
    };
    let mut pairs: Vec<(usize, usize)> =
        pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
    pairs.sort_unstable();
    let edges = pairs
        .into_iter()
        .map(|(u, v)| (u, v, draw_weight(spec.weights, &mut rng)))
        .collect();
    let graph = WeightedGraph::new(n, edges)?;
    Ok(Generated { graph, r: spec.family.excluded_minor(), sp_trace })
}

fn draw_weight(mode: WeightMode, rng: &mut ChaCha8Rng) -> f64 {
    match mode {
        WeightMode::Unit => 1.0,
        WeightMode::Uniform { lo, hi } => {
            if lo == hi {
                lo
            } else {
                rng.gen_range(lo..=hi)
            }
        }
        WeightMode::ExponentialSpread => 2f64.powf(rng.gen_range(0.0..=20.0)),
    }
}

fn grid_edges(k: usize) -> (usize, Vec<(usize, usize)>) {
    let mut edges = Vec::with_capacity(2 * k * (k - 1));
    for r in 0..k {
        for c in 0..k {
            let v = r * k + c;
            if c + 1 < k {
                edges.push((v, v + 1));
            }
            if r + 1 < k {
                edges.push((v, v + k));
            }
        }
    }
    (k * k, edges)
}

/// Random recursive tree: vertex `v` hangs off a uniform earlier vertex.
fn tree_edges(n: usize, rng: &mut ChaCha8Rng) -> (usize, Vec<(usize, usize)>) {
    let edges = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    (n, edges)
}

fn series_parallel_edges(
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (usize, Vec<(usize, usize)>, Vec<SpStep>) {
    if n == 1 {
        return (1, Vec::new(), Vec::new());
    }
    let mut edges = vec![(0usize, 1usize)];
    let mut trace = Vec::new();
    for new in 2..n {
        let idx = rng.gen_range(0..edges.len());
        let (u, v) = edges[idx];
        if rng.gen_bool(0.5) {
            edges[idx] = (u, new);
            edges.push((new, v));
            trace.push(SpStep::Series { u, v, new });
        } else {
            edges.push((u, new));
            edges.push((new, v));
            trace.push(SpStep::Parallel { u, v, new });
        }
    }
    (n, edges, trace)
}

/// Stacked triangulation: each new vertex is dropped into a uniformly chosen
/// face and joined to its three corners.
fn triangulation_edges(n: usize, rng: &mut ChaCha8Rng) -> (usize, Vec<(usize, usize)>) {
    match n {
        1 => return (1, Vec::new()),
        2 => return (2, vec![(0, 1)]),
        _ => {}
    }
    let mut edges = vec![(0, 1), (1, 2), (0, 2)];
    // inner and outer face of the starting triangle
    let mut faces = vec![[0usize, 1, 2], [0, 1, 2]];
    for v in 3..n {
        let idx = rng.gen_range(0..faces.len());
        let [a, b, c] = faces[idx];
        edges.extend([(a, v), (b, v), (c, v)]);
        faces[idx] = [a, b, v];
        faces.push([b, c, v]);
        faces.push([a, c, v]);
    }
    (n, edges)
}

/// Rebuilds the edge list described by a series-parallel trace.
pub fn replay_sp_trace(trace: &[SpStep]) -> Vec<(usize, usize)> {
    let mut edges = vec![(0usize, 1usize)];
    for step in trace {
        match *step {
            SpStep::Series { u, v, new } => {
                let pos = edges
                    .iter()
                    .position(|&e| e == (u, v))
                    .expect("series step refers to an existing edge");
                edges[pos] = (u, new);
                edges.push((new, v));
            }
            SpStep::Parallel { u, v, new } => {
                edges.push((u, new));
                edges.push((new, v));
            }
        }
    }
    let mut out: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn spec(family: Family, size: usize, seed: u64) -> FamilySpec {
        FamilySpec { family, size, weights: WeightMode::Unit, seed }
    }

    /// Treewidth <= 2 check by exhaustive series/parallel reduction: strip
    /// vertices of degree <= 1 and suppress degree-2 vertices, merging
    /// parallel edges. Only graphs of treewidth at most two reduce to nothing.
    fn reduces_to_empty(n: usize, edges: &[(usize, usize)]) -> bool {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            adj[u].insert(v);
            adj[v].insert(u);
        }
        let mut alive: BTreeSet<usize> = (0..n).collect();
        loop {
            let pick = alive.iter().copied().find(|&v| adj[v].len() <= 2);
            let Some(v) = pick else { break };
            let nb: Vec<usize> = adj[v].iter().copied().collect();
            for &u in &nb {
                adj[u].remove(&v);
            }
            if nb.len() == 2 {
                adj[nb[0]].insert(nb[1]);
                adj[nb[1]].insert(nb[0]);
            }
            adj[v].clear();
            alive.remove(&v);
        }
        alive.is_empty()
    }

    #[test]
    fn grid_counts() {
        let g = generate(&spec(Family::Grid, 4, 1)).unwrap();
        assert_eq!(g.graph.n(), 16);
        assert_eq!(g.graph.edges().len(), 24);
        assert_eq!(g.r, 5);
        for k in 1..9 {
            let g = generate(&spec(Family::Grid, k, 0)).unwrap();
            assert_eq!(g.graph.n(), k * k);
            assert_eq!(g.graph.edges().len(), 2 * k * (k - 1));
        }
    }

    #[test]
    fn trees_are_spanning() {
        for n in [1, 2, 17, 90] {
            let g = generate(&spec(Family::Tree, n, 3)).unwrap();
            assert_eq!(g.graph.n(), n);
            assert_eq!(g.graph.edges().len(), n - 1);
            assert_eq!(g.r, 3);
        }
    }

    #[test]
    fn series_parallel_has_treewidth_two_and_replays() {
        for seed in 0..20 {
            let g = generate(&spec(Family::SeriesParallel, 30, seed)).unwrap();
            let pairs: Vec<(usize, usize)> = g.graph.edges().iter().map(|e| (e.0, e.1)).collect();
            assert!(reduces_to_empty(30, &pairs), "seed {seed}");
            assert_eq!(replay_sp_trace(g.sp_trace.as_ref().unwrap()), pairs);
            assert_eq!(g.r, 4);
        }
    }

    #[test]
    fn reduction_oracle_rejects_k4() {
        let k4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        assert!(!reduces_to_empty(4, &k4));
    }

    #[test]
    fn triangulations_are_maximal_planar() {
        for n in [3, 4, 10, 57] {
            let g = generate(&spec(Family::PlanarTriangulation, n, 9)).unwrap();
            assert_eq!(g.graph.edges().len(), 3 * n - 6);
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        for family in [Family::Grid, Family::Tree, Family::SeriesParallel, Family::PlanarTriangulation] {
            let s = FamilySpec { family, size: 25, weights: WeightMode::ExponentialSpread, seed: 42 };
            let a = generate(&s).unwrap().graph.to_json_string();
            let b = generate(&s).unwrap().graph.to_json_string();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn weight_modes() {
        let s = FamilySpec {
            family: Family::Tree,
            size: 200,
            weights: WeightMode::ExponentialSpread,
            seed: 5,
        };
        let g = generate(&s).unwrap();
        assert!(g.graph.edges().iter().all(|e| (1.0..=1048576.0).contains(&e.2)));
        let u: WeightMode = "uniform:2:3".parse().unwrap();
        assert_eq!(u, WeightMode::Uniform { lo: 2.0, hi: 3.0 });
        assert!("uniform:3:2".parse::<WeightMode>().is_err());
        assert!("grid2".parse::<Family>().is_err());
    }
}

//! Weighted undirected graphs and the metric primitives everything else is
//! built on: restricted shortest paths, balls, set distances, diameters and
//! the two weight transforms used by the embedding pipeline.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack used for every threshold comparison on distances.
pub const DIST_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("edge {index} references vertex {vertex} but n = {n}")]
    VertexOutOfRange { index: usize, vertex: usize, n: usize },
    #[error("edge {index} is a self-loop on vertex {vertex}")]
    SelfLoop { index: usize, vertex: usize },
    #[error("duplicate edge between {u} and {v}")]
    DuplicateEdge { u: usize, v: usize },
    #[error("edge {index} has invalid weight {weight}")]
    BadWeight { index: usize, weight: f64 },
    #[error("graph is disconnected; components: {components:?}")]
    Disconnected { components: Vec<Vec<usize>> },
    #[error("all pairwise distances are zero")]
    AllZero,
    #[error("source vertex {0} out of range")]
    SourceOutOfRange(usize),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed graph json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

/// Connected, undirected graph with non-negative edge weights.
///
/// Edges are stored canonically with `u < v` and sorted, so two graphs built
/// from the same edge set serialize identically.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    adj: Vec<Vec<(usize, f64)>>,
    max_weight: f64,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (index, &(u, v, w)) in edges.iter().enumerate() {
            for vertex in [u, v] {
                if vertex >= n {
                    return Err(GraphError::VertexOutOfRange { index, vertex, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { index, vertex: u });
            }
            if !w.is_finite() || w < 0.0 {
                return Err(GraphError::BadWeight { index, weight: w });
            }
            canon.push((u.min(v), u.max(v), w));
        }
        canon.sort_by_key(|e| (e.0, e.1));
        for pair in canon.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(GraphError::DuplicateEdge { u: pair[0].0, v: pair[0].1 });
            }
        }
        let mut adj = vec![Vec::new(); n];
        let mut max_weight: f64 = 0.0;
        for &(u, v, w) in &canon {
            adj[u].push((v, w));
            adj[v].push((u, w));
            max_weight = max_weight.max(w);
        }
        let g = WeightedGraph { n, edges: canon, adj, max_weight };
        let components = g.components(None);
        if components.len() > 1 {
            return Err(GraphError::Disconnected { components });
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    /// Absolute slack: `1e-9` times the largest edge weight.
    pub fn tol(&self) -> f64 {
        DIST_TOL * self.max_weight.max(f64::MIN_POSITIVE)
    }

    /// `a <= b` up to the instance tolerance. The slack is also capped
    /// relative to `b`, so comparisons against tiny thresholds stay exact on
    /// graphs whose weights span many orders of magnitude.
    pub fn le(&self, a: f64, b: f64) -> bool {
        if b.is_infinite() {
            return b > 0.0 || a == b;
        }
        a <= b + self.tol().min(DIST_TOL * b.abs())
    }

    /// Strict `a > b`, the negation of [`le`](Self::le).
    pub fn gt(&self, a: f64, b: f64) -> bool {
        !self.le(a, b)
    }

    pub fn from_json_str(s: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(s)?;
        WeightedGraph::new(file.n, file.edges)
    }

    pub fn to_json_string(&self) -> String {
        let file = GraphFile { n: self.n, edges: self.edges.clone() };
        serde_json::to_string(&file).expect("graph serializes")
    }

    pub fn load(path: &Path) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_json_string() + "\n").map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Connected components of the (optionally induced) subgraph, each sorted,
    /// listed by smallest member.
    pub fn components(&self, restrict: Option<&[bool]>) -> Vec<Vec<usize>> {
        let inside = |v: usize| restrict.is_none_or(|m| m[v]);
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] || !inside(start) {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for &(u, _) in &self.adj[v] {
                    if !seen[u] && inside(u) {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Boolean membership mask over `0..n` for a vertex list.
pub fn mask_of(n: usize, vertices: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in vertices {
        m[v] = true;
    }
    m
}

/// Materialized distances from one source.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub source: usize,
    pub dist: Vec<f64>,
}

#[derive(Copy, Clone, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, vertex)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra inside the subgraph induced by `restrict`.
///
/// Returns distances and a predecessor array (`usize::MAX` for sources and
/// unreachable vertices). Predecessors only change on strict improvement and
/// the heap pops by `(dist, id)`, so trees are deterministic.
pub fn dijkstra(
    g: &WeightedGraph,
    sources: &[usize],
    restrict: Option<&[bool]>,
) -> (Vec<f64>, Vec<usize>) {
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    let inside = |v: usize| restrict.is_none_or(|m| m[v]);
    for &s in sources {
        if inside(s) && dist[s] > 0.0 {
            dist[s] = 0.0;
            heap.push(HeapItem { dist: 0.0, vertex: s });
        }
    }
    let mut done = vec![false; n];
    while let Some(HeapItem { dist: d, vertex: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(u, w) in g.neighbors(v) {
            if !inside(u) || done[u] {
                continue;
            }
            let nd = d + w;
            if nd < dist[u] {
                dist[u] = nd;
                pred[u] = v;
                heap.push(HeapItem { dist: nd, vertex: u });
            }
        }
    }
    (dist, pred)
}

/// Single-source shortest paths, optionally inside `G[restrict]`.
pub fn sssp(
    g: &WeightedGraph,
    source: usize,
    restrict: Option<&[bool]>,
) -> Result<DistanceField, GraphError> {
    if source >= g.n() {
        return Err(GraphError::SourceOutOfRange(source));
    }
    if let Some(m) = restrict {
        if !m[source] {
            return Err(GraphError::BadParameter(format!(
                "source {source} is outside the restriction"
            )));
        }
    }
    let (dist, _) = dijkstra(g, &[source], restrict);
    Ok(DistanceField { source, dist })
}

/// Closed ball around `center`, sorted.
pub fn ball(
    g: &WeightedGraph,
    center: usize,
    radius: f64,
    restrict: Option<&[bool]>,
) -> Result<Vec<usize>, GraphError> {
    if radius < 0.0 || radius.is_nan() {
        return Err(GraphError::BadParameter(format!("negative radius {radius}")));
    }
    let field = sssp(g, center, restrict)?;
    Ok((0..g.n()).filter(|&u| g.le(field.dist[u], radius)).collect())
}

/// Closed ball around a vertex set (multi-source), sorted.
pub fn set_ball(
    g: &WeightedGraph,
    centers: &[usize],
    radius: f64,
    restrict: Option<&[bool]>,
) -> Vec<usize> {
    let (dist, _) = dijkstra(g, centers, restrict);
    (0..g.n()).filter(|&u| g.le(dist[u], radius)).collect()
}

/// `min_{a in target} d(v, a)` in the induced metric; `+inf` for an empty target.
pub fn set_distance(
    g: &WeightedGraph,
    v: usize,
    target: &[usize],
    restrict: Option<&[bool]>,
) -> f64 {
    if target.is_empty() || v >= g.n() {
        return f64::INFINITY;
    }
    let (dist, _) = dijkstra(g, target, restrict);
    dist[v]
}

/// Diameter of `G[cluster]`; `+inf` when the induced subgraph is disconnected.
pub fn strong_diameter(g: &WeightedGraph, cluster: &[usize]) -> f64 {
    if cluster.len() <= 1 {
        return 0.0;
    }
    let mask = mask_of(g.n(), cluster);
    let mut best: f64 = 0.0;
    for &s in cluster {
        let (dist, _) = dijkstra(g, &[s], Some(&mask));
        for &u in cluster {
            best = best.max(dist[u]);
        }
        if best.is_infinite() {
            break;
        }
    }
    best
}

/// Diameter of a vertex set measured in the ambient metric.
pub fn weak_diameter(apsp: &[Vec<f64>], cluster: &[usize]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, &a) in cluster.iter().enumerate() {
        for &b in &cluster[i + 1..] {
            best = best.max(apsp[a][b]);
        }
    }
    best
}

/// All-pairs distances by repeated Dijkstra.
pub fn all_pairs(g: &WeightedGraph) -> Vec<Vec<f64>> {
    (0..g.n()).map(|s| dijkstra(g, &[s], None).0).collect()
}

/// Largest and smallest non-zero pairwise distance.
pub fn distance_extremes(apsp: &[Vec<f64>]) -> Option<(f64, f64)> {
    let mut max: f64 = 0.0;
    let mut min = f64::INFINITY;
    for row in apsp {
        for &d in row {
            if d > 0.0 {
                max = max.max(d);
                min = min.min(d);
            }
        }
    }
    if min.is_finite() {
        Some((max, min))
    } else {
        None
    }
}

/// Max distance over min non-zero distance.
pub fn aspect_ratio(g: &WeightedGraph) -> Result<f64, GraphError> {
    let apsp = all_pairs(g);
    distance_extremes(&apsp)
        .map(|(max, min)| max / min)
        .ok_or(GraphError::AllZero)
}

/// Caps every weight at `alpha` and zeroes weights at or below `alpha / s^2`.
pub fn truncate_weights(g: &WeightedGraph, alpha: f64, s: f64) -> Result<WeightedGraph, GraphError> {
    if !(alpha > 0.0) || !(s > 1.0) {
        return Err(GraphError::BadParameter(format!(
            "truncation needs alpha > 0 and s > 1 (got {alpha}, {s})"
        )));
    }
    let floor = alpha / (s * s);
    let edges = g
        .edges()
        .iter()
        .map(|&(u, v, w)| {
            let t = if w >= alpha {
                alpha
            } else if w > floor {
                w
            } else {
                0.0
            };
            (u, v, t)
        })
        .collect();
    WeightedGraph::new(g.n(), edges)
}

/// Result of [`subdivide`]: the new graph plus where the old vertices went.
#[derive(Debug, Clone)]
pub struct Subdivision {
    pub graph: WeightedGraph,
    /// `original[v]` is the id of old vertex `v` in the new graph.
    pub original: Vec<usize>,
}

/// Replaces each edge by a path of `pieces` equal edges. Old vertices keep
/// their ids; path-interior vertices are appended edge by edge.
pub fn subdivide(g: &WeightedGraph, pieces: usize) -> Result<Subdivision, GraphError> {
    if pieces == 0 {
        return Err(GraphError::BadParameter("pieces must be >= 1".into()));
    }
    let mut next = g.n();
    let mut edges = Vec::with_capacity(g.edges().len() * pieces);
    for &(u, v, w) in g.edges() {
        let piece = w / pieces as f64;
        let mut prev = u;
        for _ in 1..pieces {
            edges.push((prev, next, piece));
            prev = next;
            next += 1;
        }
        edges.push((prev, v, piece));
    }
    let graph = WeightedGraph::new(next, edges)?;
    Ok(Subdivision { graph, original: (0..g.n()).collect() })
}

/// Same graph with all weights multiplied by `factor`.
pub fn scale_weights(g: &WeightedGraph, factor: f64) -> WeightedGraph {
    let edges = g.edges().iter().map(|&(u, v, w)| (u, v, w * factor)).collect();
    WeightedGraph::new(g.n(), edges).expect("scaling keeps graph valid")
}

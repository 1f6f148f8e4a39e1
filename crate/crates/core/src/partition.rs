//! Sparse partitions obtained by clipping a cover, and the partition-index
//! coloring of a cover with its neighbor-conflict check.

use serde::{Deserialize, Serialize};

use crate::cover::PartitionCover;
use crate::graph::{all_pairs, weak_diameter, WeightedGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsePartition {
    pub clusters: Vec<Vec<usize>>,
    pub alpha: f64,
    /// Most clusters met by one ball of radius `diam / alpha` (measured).
    pub tau: usize,
    pub diam: f64,
    /// Partition count of the source cover.
    pub s: usize,
    pub tau_exceeds_s: bool,
    pub max_weak_diameter: f64,
}

/// Walks clusters in (partition, cluster) order and keeps, for each, the
/// vertices not yet assigned. Empty leftovers are dropped.
pub fn to_sparse_partition(g: &WeightedGraph, c: &PartitionCover) -> SparsePartition {
    to_sparse_partition_with(g, &all_pairs(g), c)
}

pub fn to_sparse_partition_with(g: &WeightedGraph, apsp: &[Vec<f64>], c: &PartitionCover) -> SparsePartition {
    let n = g.n();
    let mut assigned = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for part in &c.partitions {
        for cluster in part {
            let rest: Vec<usize> = cluster.iter().copied().filter(|&v| assigned[v] == usize::MAX).collect();
            if rest.is_empty() {
                continue;
            }
            for &v in &rest {
                assigned[v] = clusters.len();
            }
            clusters.push(rest);
        }
    }
    let alpha = c.beta;
    let radius = c.diam / alpha;
    let mut tau = 0;
    for v in 0..n {
        let mut hit = vec![false; clusters.len()];
        for u in 0..n {
            if g.le(apsp[v][u], radius) && assigned[u] != usize::MAX {
                hit[assigned[u]] = true;
            }
        }
        tau = tau.max(hit.iter().filter(|&&h| h).count());
    }
    let max_weak_diameter = clusters.iter().map(|cl| weak_diameter(apsp, cl)).fold(0.0, f64::max);
    SparsePartition {
        clusters,
        alpha,
        tau,
        diam: c.diam,
        s: c.s,
        tau_exceeds_s: tau > c.s,
        max_weak_diameter,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SparsePartitionReport {
    pub is_partition: bool,
    pub diameter_ok: bool,
    pub max_weak_diameter: f64,
    pub tau: usize,
    pub tau_exceeds_s: bool,
    pub failures: Vec<String>,
}

impl SparsePartitionReport {
    /// `tau` above `s` is informational only.
    pub fn passes(&self) -> bool {
        self.is_partition && self.diameter_ok
    }
}

pub fn verify_sparse_partition(g: &WeightedGraph, apsp: &[Vec<f64>], p: &SparsePartition) -> SparsePartitionReport {
    let n = g.n();
    let mut seen = vec![0usize; n];
    let mut failures = Vec::new();
    for cl in &p.clusters {
        for &v in cl {
            if v < n {
                seen[v] += 1;
            } else {
                failures.push(format!("vertex {v} out of range"));
            }
        }
    }
    for (v, &k) in seen.iter().enumerate() {
        if k != 1 {
            failures.push(format!("vertex {v} appears in {k} clusters"));
        }
    }
    let is_partition = failures.is_empty();
    let mut max_weak_diameter: f64 = 0.0;
    let mut diameter_ok = true;
    for (i, cl) in p.clusters.iter().enumerate() {
        let dia = weak_diameter(apsp, cl);
        max_weak_diameter = max_weak_diameter.max(dia);
        if !g.le(dia, p.diam) {
            diameter_ok = false;
            failures.push(format!("cluster {i}: weak diameter {dia} > {}", p.diam));
        }
    }
    SparsePartitionReport {
        is_partition,
        diameter_ok,
        max_weak_diameter,
        tau: p.tau,
        tau_exceeds_s: p.tau_exceeds_s,
        failures,
    }
}

/// Color of every cluster, indexed `[partition][cluster]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverColoring {
    pub colors: Vec<Vec<usize>>,
    pub k: usize,
}

/// Every cluster gets its partition index as color.
pub fn color_cover(c: &PartitionCover) -> CoverColoring {
    CoverColoring {
        colors: c.partitions.iter().enumerate().map(|(p, part)| vec![p; part.len()]).collect(),
        k: c.partitions.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorConflict {
    pub color: usize,
    /// `(partition, cluster)` of the two clashing clusters.
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub x: usize,
    pub y: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColoringReport {
    pub colors_used: usize,
    pub satisfied_pairs: usize,
    pub conflicts: Vec<ColorConflict>,
}

impl ColoringReport {
    pub fn passes(&self) -> bool {
        self.conflicts.is_empty()
    }
}

/// Two clusters are neighbors when they hold vertices `x`, `y` at distance at
/// most `diam / beta`, with each vertex's `diam / beta` ball inside its own
/// cluster. Neighbors must get different colors.
pub fn verify_coloring(g: &WeightedGraph, apsp: &[Vec<f64>], c: &PartitionCover, col: &CoverColoring) -> ColoringReport {
    let n = g.n();
    let radius = c.diam / c.beta;
    // (color, partition, cluster, satisfied vertices)
    let mut entries: Vec<(usize, usize, usize, Vec<usize>)> = Vec::new();
    let mut satisfied_pairs = 0;
    for (p, part) in c.partitions.iter().enumerate() {
        let mut owner = vec![usize::MAX; n];
        for (k, cl) in part.iter().enumerate() {
            for &v in cl {
                if v < n {
                    owner[v] = k;
                }
            }
        }
        for (k, cl) in part.iter().enumerate() {
            let sat: Vec<usize> = cl
                .iter()
                .copied()
                .filter(|&x| x < n && (0..n).all(|u| owner[u] == k || !g.le(apsp[x][u], radius)))
                .collect();
            satisfied_pairs += sat.len();
            let color = col.colors.get(p).and_then(|cs| cs.get(k)).copied().unwrap_or(usize::MAX);
            entries.push((color, p, k, sat));
        }
    }
    entries.sort_by_key(|e| (e.0, e.1, e.2));
    let mut conflicts = Vec::new();
    let mut start = 0;
    while start < entries.len() {
        let mut end = start;
        while end < entries.len() && entries[end].0 == entries[start].0 {
            end += 1;
        }
        for a in start..end {
            for b in a + 1..end {
                let (ea, eb) = (&entries[a], &entries[b]);
                'pair: for &x in &ea.3 {
                    for &y in &eb.3 {
                        if g.le(apsp[x][y], radius) {
                            conflicts.push(ColorConflict {
                                color: ea.0,
                                first: (ea.1, ea.2),
                                second: (eb.1, eb.2),
                                x,
                                y,
                                distance: apsp[x][y],
                            });
                            break 'pair;
                        }
                    }
                }
            }
        }
        start = end;
    }
    let mut used: Vec<usize> = col.colors.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    ColoringReport { colors_used: used.len(), satisfied_pairs, conflicts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::build_cover;
    use crate::generators::{generate, Family, FamilySpec, WeightMode};

    fn grid(k: usize) -> WeightedGraph {
        generate(&FamilySpec { family: Family::Grid, size: k, weights: WeightMode::Unit, seed: 0 })
            .unwrap()
            .graph
    }

    #[test]
    fn single_partition_is_unchanged() {
        let g = grid(3);
        let c = PartitionCover {
            beta: 2.0,
            s: 1,
            diam: 4.0,
            partitions: vec![vec![vec![0, 1, 3, 4], vec![2, 5, 8], vec![6, 7]]],
            provenance: None,
        };
        let p = to_sparse_partition(&g, &c);
        assert_eq!(p.clusters, c.partitions[0]);
        let rep = verify_sparse_partition(&g, &all_pairs(&g), &p);
        assert!(rep.passes(), "{:?}", rep.failures);
    }

    #[test]
    fn clipping_assigns_each_vertex_once() {
        let g = grid(6);
        let c = build_cover(&g, 5, 1, 3.0).unwrap();
        let apsp = all_pairs(&g);
        let p = to_sparse_partition_with(&g, &apsp, &c);
        let rep = verify_sparse_partition(&g, &apsp, &p);
        assert!(rep.passes(), "{:?}", rep.failures);
        assert!(p.max_weak_diameter <= c.diam);
    }

    #[test]
    fn one_partition_gets_one_color() {
        let c = PartitionCover::trivial(4, 1.0);
        let col = color_cover(&c);
        assert_eq!(col.colors, vec![vec![0]]);
        assert_eq!(col.k, 1);
    }

    #[test]
    fn built_cover_coloring_verifies() {
        let g = grid(6);
        let c = build_cover(&g, 5, 1, 3.0).unwrap();
        let col = color_cover(&c);
        assert_eq!(col.k, c.s);
        let rep = verify_coloring(&g, &all_pairs(&g), &c, &col);
        assert!(rep.passes(), "{:?}", rep.conflicts);
        assert_eq!(rep.colors_used, c.s);
    }

    #[test]
    fn hand_built_conflict_is_named() {
        // unit path 0-1-2-3 at radius 1: vertex 1 is satisfied by {0,1,2},
        // vertex 2 by {1,2,3}, and both clusters are colored 0
        let g = WeightedGraph::new(4, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let c = PartitionCover {
            beta: 4.0,
            s: 2,
            diam: 4.0,
            partitions: vec![vec![vec![0, 1, 2], vec![3]], vec![vec![0], vec![1, 2, 3]]],
            provenance: None,
        };
        let bad = CoverColoring { colors: vec![vec![0, 1], vec![1, 0]], k: 2 };
        let rep = verify_coloring(&g, &all_pairs(&g), &c, &bad);
        assert!(!rep.passes());
        let conflict = &rep.conflicts[0];
        assert_eq!(conflict.color, 0);
        assert_eq!((conflict.first, conflict.second), ((0, 0), (1, 1)));
        assert_eq!((conflict.x, conflict.y), (1, 2));
    }
}

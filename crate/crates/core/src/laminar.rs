//! Laminar partition ladders: one refinement chain per cover index, built
//! bottom-up from covers at geometrically growing scales.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::{pad_partitions, PartitionCover};
use crate::graph::{weak_diameter, WeightedGraph};

#[derive(Debug, Error)]
pub enum LadderError {
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error("expected {expected} covers (levels 0..={top}), got {got}")]
    CoverCount { expected: usize, top: usize, got: usize },
    #[error("cover at level {level} has {got} partitions after padding, need {tau}")]
    TooFewPartitions { level: usize, got: usize, tau: usize },
}

/// Levels `-1 ..= top + 1` of one ladder. Below `-1` every level is all
/// singletons; above `top + 1` every level is `{V}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaminarHierarchy {
    pub j: usize,
    pub a: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub top: usize,
    pub n: usize,
    /// `levels[k]` is level `k - 1`.
    pub levels: Vec<Vec<Vec<usize>>>,
}

impl LaminarHierarchy {
    pub fn growth(&self) -> f64 {
        4.0 * self.beta / self.epsilon
    }

    /// `a * (4 beta / epsilon)^i`.
    pub fn scale(&self, i: i64) -> f64 {
        self.a * self.growth().powi(i as i32)
    }

    /// Partition at any integer level.
    pub fn level(&self, i: i64) -> Vec<Vec<usize>> {
        if i < -1 {
            (0..self.n).map(|v| vec![v]).collect()
        } else if i > self.top as i64 + 1 {
            vec![(0..self.n).collect()]
        } else {
            self.levels[(i + 1) as usize].clone()
        }
    }

    /// Stored levels paired with their index, lowest first.
    pub fn stored(&self) -> impl Iterator<Item = (i64, &Vec<Vec<usize>>)> {
        self.levels.iter().enumerate().map(|(k, p)| (k as i64 - 1, p))
    }
}

/// Smallest `i >= 0` with `a * growth^i >= max_distance`.
pub fn top_level(a: f64, growth: f64, max_distance: f64) -> usize {
    let mut i = 0;
    let mut s = a;
    while s < max_distance {
        s *= growth;
        i += 1;
    }
    i
}

/// Builds `tau` ladders from `covers[i]`, the cover at scale
/// `a * (4 beta / epsilon)^i` for `i = 0..=top`.
///
/// At level `i`, clusters of the ladder's partition are taken by lowest
/// vertex id; each is first clipped to the vertices no earlier new cluster
/// took, and then replaced by the union of the level `i - 1` clusters it
/// meets.
pub fn build_ladders(
    n: usize,
    covers: &[PartitionCover],
    a: f64,
    epsilon: f64,
    beta: f64,
    tau: usize,
) -> Result<Vec<LaminarHierarchy>, LadderError> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(beta >= 1.0) || !(a > 0.0) || tau == 0 {
        return Err(LadderError::BadParameters(format!(
            "need 0 < epsilon < 1, beta >= 1, a > 0, tau >= 1 (got {epsilon}, {beta}, {a}, {tau})"
        )));
    }
    if covers.is_empty() {
        return Err(LadderError::CoverCount { expected: 1, top: 0, got: 0 });
    }
    let top = covers.len() - 1;
    let padded: Vec<Vec<Vec<Vec<usize>>>> = covers.iter().map(|c| pad_partitions(c, tau)).collect();
    for (level, p) in padded.iter().enumerate() {
        if p.len() < tau {
            return Err(LadderError::TooFewPartitions { level, got: p.len(), tau });
        }
    }
    let singletons: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut ladders = Vec::with_capacity(tau);
    for j in 0..tau {
        let mut levels = vec![singletons.clone()];
        for cover_parts in &padded {
            let below = levels.last().expect("level -1 exists");
            levels.push(lift(n, &cover_parts[j], below));
        }
        levels.push(vec![(0..n).collect()]);
        ladders.push(LaminarHierarchy { j, a, epsilon, beta, top, n, levels });
    }
    Ok(ladders)
}

fn lift(n: usize, original: &[Vec<usize>], below: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut below_of = vec![usize::MAX; n];
    for (k, cl) in below.iter().enumerate() {
        for &v in cl {
            below_of[v] = k;
        }
    }
    let mut order: Vec<&Vec<usize>> = original.iter().filter(|c| !c.is_empty()).collect();
    order.sort_by_key(|c| *c.iter().min().expect("non-empty"));
    let mut taken = vec![false; n];
    let mut used_below = vec![false; below.len()];
    let mut out = Vec::new();
    for cl in order {
        let mut merged: Vec<usize> = Vec::new();
        for &v in cl {
            if taken[v] {
                continue;
            }
            let k = below_of[v];
            if !used_below[k] {
                used_below[k] = true;
                merged.extend(&below[k]);
            }
        }
        if merged.is_empty() {
            continue;
        }
        for &v in &merged {
            taken[v] = true;
        }
        merged.sort_unstable();
        out.push(merged);
    }
    // a vertex the cover missed keeps its lower cluster
    for (k, cl) in below.iter().enumerate() {
        if !used_below[k] {
            out.push(cl.clone());
        }
    }
    out.sort_by_key(|c| c[0]);
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderReport {
    pub refinement_ok: bool,
    pub diameter_ok: bool,
    pub padding_ok: bool,
    /// Largest level diameter divided by its scale.
    pub max_diameter_ratio: f64,
    pub failures: Vec<String>,
}

impl LadderReport {
    pub fn passes(&self) -> bool {
        self.refinement_ok && self.diameter_ok && self.padding_ok
    }
}

/// Structural refinement, level diameters against `(1 + epsilon) * scale`,
/// and, for levels `0..=top`, that every vertex has its
/// `scale / ((1 + epsilon) beta)` ball inside one cluster of some ladder.
pub fn verify_ladders(g: &WeightedGraph, apsp: &[Vec<f64>], ladders: &[LaminarHierarchy]) -> LadderReport {
    let n = g.n();
    let mut rep = LadderReport {
        refinement_ok: true,
        diameter_ok: true,
        padding_ok: true,
        max_diameter_ratio: 0.0,
        failures: Vec::new(),
    };
    let Some(first) = ladders.first() else {
        return rep;
    };
    for lad in ladders {
        let mut prev: Option<Vec<usize>> = None;
        for (i, part) in lad.stored() {
            let mut owner = vec![usize::MAX; n];
            for (k, cl) in part.iter().enumerate() {
                for &v in cl {
                    if owner[v] != usize::MAX {
                        rep.refinement_ok = false;
                        rep.failures.push(format!("ladder {} level {i}: vertex {v} repeated", lad.j));
                    }
                    owner[v] = k;
                }
            }
            if owner.contains(&usize::MAX) {
                rep.refinement_ok = false;
                rep.failures.push(format!("ladder {} level {i}: not a cover of V", lad.j));
            }
            if let Some(lower) = &prev {
                // every lower cluster lies inside one cluster of this level
                let mut parent = vec![usize::MAX; n];
                for v in 0..n {
                    let k = lower[v];
                    if parent[k] == usize::MAX {
                        parent[k] = owner[v];
                    } else if parent[k] != owner[v] {
                        rep.refinement_ok = false;
                        rep.failures.push(format!(
                            "ladder {} level {}: a cluster is split by level {i} at vertex {v}",
                            lad.j,
                            i - 1
                        ));
                    }
                }
            }
            if i <= lad.top as i64 {
                let scale = lad.scale(i);
                for cl in part {
                    let dia = weak_diameter(apsp, cl);
                    if i >= 0 {
                        rep.max_diameter_ratio = rep.max_diameter_ratio.max(dia / scale);
                    }
                    let bound = if i < 0 { 0.0 } else { (1.0 + lad.epsilon) * scale };
                    if !g.le(dia, bound) {
                        rep.diameter_ok = false;
                        rep.failures.push(format!(
                            "ladder {} level {i}: cluster at {} has diameter {dia} > {bound}",
                            lad.j, cl[0]
                        ));
                    }
                }
            }
            prev = Some(owner);
        }
    }

    // owners[ladder][level][v]
    let owners: Vec<Vec<Vec<usize>>> = ladders
        .iter()
        .map(|lad| {
            lad.levels
                .iter()
                .map(|part| {
                    let mut o = vec![0; n];
                    for (k, cl) in part.iter().enumerate() {
                        for &v in cl {
                            o[v] = k;
                        }
                    }
                    o
                })
                .collect()
        })
        .collect();
    for i in 0..=first.top as i64 {
        let radius = first.scale(i) / ((1.0 + first.epsilon) * first.beta);
        for v in 0..n {
            let ok = owners.iter().any(|o| {
                let o = &o[(i + 1) as usize];
                (0..n).all(|u| o[u] == o[v] || !g.le(apsp[v][u], radius))
            });
            if !ok {
                rep.padding_ok = false;
                rep.failures.push(format!("level {i}: ball of radius {radius} around {v} is split in every ladder"));
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::fit_scheme;
    use crate::generators::{generate, Family, FamilySpec, WeightMode};
    use crate::graph::{all_pairs, distance_extremes};

    fn grid(k: usize) -> WeightedGraph {
        generate(&FamilySpec { family: Family::Grid, size: k, weights: WeightMode::Unit, seed: 0 })
            .unwrap()
            .graph
    }

    #[test]
    fn single_vertex() {
        let c = PartitionCover::trivial(1, 0.0);
        let l = build_ladders(1, &[c], 1.0, 0.5, 4.0, 1).unwrap();
        assert_eq!(l.len(), 1);
        for (_, p) in l[0].stored() {
            assert_eq!(p, &vec![vec![0]]);
        }
    }

    #[test]
    fn lift_unions_lower_clusters() {
        let below = vec![vec![0, 1], vec![2], vec![3, 4]];
        let original = vec![vec![1, 2], vec![0, 3, 4]];
        // cluster {0,3,4} comes first (lowest id 0) and takes {0,1} and {3,4}
        assert_eq!(lift(5, &original, &below), vec![vec![0, 1, 3, 4], vec![2]]);
    }

    #[test]
    fn implicit_levels() {
        let c = PartitionCover::trivial(3, 1.0);
        let l = &build_ladders(3, &[c], 1.0, 0.5, 2.0, 1).unwrap()[0];
        assert_eq!(l.level(-5), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(l.level(9), vec![vec![0, 1, 2]]);
        assert_eq!(l.scale(1), 16.0);
    }

    #[test]
    fn grid_ladders_verify() {
        let g = grid(6);
        let apsp = all_pairs(&g);
        let (maxd, _) = distance_extremes(&apsp).unwrap();
        let (r, q, eps, a) = (5, 1, 0.5, 1.0);
        let fit = fit_scheme(&g, r, q, |beta| {
            let top = top_level(a, 4.0 * beta / eps, maxd);
            (0..=top).map(|i| a * (4.0 * beta / eps).powi(i as i32)).collect()
        })
        .unwrap();
        let tau = fit.covers.iter().map(|c| c.partitions.len()).max().unwrap();
        let ladders = build_ladders(g.n(), &fit.covers, a, eps, fit.scheme.beta, tau).unwrap();
        let rep = verify_ladders(&g, &apsp, &ladders);
        assert!(rep.passes(), "{:?}", rep.failures);
    }
}

use serde::{Deserialize, Serialize};

use super::{embed_hierarchy, EmbedError, Embedding};
use crate::cover::{fit_scheme, rho_star, CoverScheme, PartitionCover};
use crate::graph::{all_pairs, distance_extremes, scale_weights, WeightedGraph};
use crate::laminar::{build_ladders, LaminarHierarchy};
use crate::util::{ceil_log2, steps_to_reach};

/// Covers and ladders for one base `a = (1 + epsilon)^step`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleLadders {
    pub step: usize,
    pub a: f64,
    pub scales: Vec<f64>,
    pub covers: Vec<PartitionCover>,
    pub ladders: Vec<LaminarHierarchy>,
}

/// Everything the multi-scale embedding was built from. Distances inside
/// (`apsp`, scales, covers) are in units of the smallest positive distance.
#[derive(Debug, Clone)]
pub struct MultiScaleRun {
    pub embedding: Embedding,
    pub r: usize,
    pub q: usize,
    pub epsilon: f64,
    pub scheme: CoverScheme,
    pub fit_attempts: usize,
    /// Smallest positive distance of the input graph.
    pub unit: f64,
    /// Largest distance after normalization.
    pub phi: f64,
    /// Number of bases `a`.
    pub steps: usize,
    /// Highest ladder level with a real cover.
    pub top: usize,
    pub tau: usize,
    pub per_step: Vec<ScaleLadders>,
    pub normalized: WeightedGraph,
    pub apsp: Vec<Vec<f64>>,
}

impl MultiScaleRun {
    /// `tau * steps * (2 ceil(log2 n) + 2 (top + 2))`, `n` the embedded points.
    pub fn dimension_formula(&self) -> usize {
        if self.per_step.is_empty() {
            return 0;
        }
        let n = self.embedding.vertices.len();
        self.tau * self.steps * (2 * ceil_log2(n) as usize + 2 * (self.top + 2))
    }

    /// Largest `scale / rho*` over all covers used: the padding factor the
    /// covers actually achieve.
    pub fn measured_padding(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for st in &self.per_step {
            for (c, &scale) in st.covers.iter().zip(&st.scales) {
                let rho = rho_star(&self.apsp, &c.partitions);
                worst = worst.max(scale / rho);
            }
        }
        worst
    }
}

/// Multi-scale embedding with preset `q = 1`.
pub fn embed_full(g: &WeightedGraph, r: usize, epsilon: f64) -> Result<MultiScaleRun, EmbedError> {
    multiscale(g, r, 1, epsilon, None)
}

/// Builds covers at scales `(1 + epsilon)^step * (4 beta / epsilon)^i` for
/// `step = 1..=Q` and `i = 0..=I`, turns each step's covers into `tau`
/// ladders, embeds every ladder on levels `-1..=I`, and concatenates. `Q` is
/// the least step count with `(1 + epsilon)^Q >= 4 beta / epsilon` and `I`
/// the least level with `(4 beta / epsilon)^I >= phi`.
///
/// Only `points` (default: all vertices) are embedded; boundary distances
/// are still measured over the whole graph.
pub fn multiscale(
    g: &WeightedGraph,
    r: usize,
    q: usize,
    epsilon: f64,
    points: Option<&[usize]>,
) -> Result<MultiScaleRun, EmbedError> {
    if !(epsilon > 0.0 && epsilon < 1.0) || r < 2 || q == 0 {
        return Err(EmbedError::BadParameters(format!(
            "need 0 < epsilon < 1, r >= 2, q >= 1 (got {epsilon}, {r}, {q})"
        )));
    }
    let points: Vec<usize> = points.map_or_else(|| (0..g.n()).collect(), <[usize]>::to_vec);
    let raw = all_pairs(g);
    let Some((maxd, unit)) = distance_extremes(&raw) else {
        return Ok(MultiScaleRun {
            embedding: Embedding::zero(points, 2.0, 1.0),
            r,
            q,
            epsilon,
            scheme: CoverScheme::nominal(r, q),
            fit_attempts: 0,
            unit: 1.0,
            phi: 0.0,
            steps: 0,
            top: 0,
            tau: 0,
            per_step: Vec::new(),
            normalized: g.clone(),
            apsp: raw,
        });
    };
    let normalized = scale_weights(g, 1.0 / unit);
    let apsp = all_pairs(&normalized);
    let phi = maxd / unit;
    let grid = |beta: f64| {
        let growth = 4.0 * beta / epsilon;
        let steps = steps_to_reach(1.0, 1.0 + epsilon, growth).max(1) as usize;
        let top = steps_to_reach(1.0, growth, phi) as usize;
        (steps, top, growth)
    };
    let fit = fit_scheme(&normalized, r, q, |beta| {
        let (steps, top, growth) = grid(beta);
        let mut scales = Vec::with_capacity(steps * (top + 1));
        for step in 1..=steps {
            let a = (1.0 + epsilon).powi(step as i32);
            for i in 0..=top {
                scales.push(a * growth.powi(i as i32));
            }
        }
        scales
    })?;
    let beta = fit.scheme.beta;
    let (steps, top, _) = grid(beta);
    let tau = fit.covers.iter().map(|c| c.partitions.len()).max().unwrap_or(1);

    let mut per_step = Vec::with_capacity(steps);
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); points.len()];
    for step in 1..=steps {
        let a = (1.0 + epsilon).powi(step as i32);
        let range = (step - 1) * (top + 1)..step * (top + 1);
        let covers = fit.covers[range.clone()].to_vec();
        let ladders = build_ladders(g.n(), &covers, a, epsilon, beta, tau)?;
        for lad in &ladders {
            let e = embed_hierarchy(&apsp, &lad.levels[..top + 2], &points)?;
            for (row, c) in rows.iter_mut().zip(e.coords) {
                row.extend(c.into_iter().map(|x| x * unit));
            }
        }
        per_step.push(ScaleLadders { step, a, scales: fit.scales[range].to_vec(), covers, ladders });
    }
    let dim = rows.first().map_or(0, Vec::len);
    let xi = beta * (1.0 + epsilon).powi(3);
    Ok(MultiScaleRun {
        embedding: Embedding { vertices: points, coords: rows, dim, rho: 2.0, xi },
        r,
        q,
        epsilon,
        scheme: fit.scheme,
        fit_attempts: fit.attempts,
        unit,
        phi,
        steps,
        top,
        tau,
        per_step,
        normalized,
        apsp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{distortion_report, PairSelection};

    #[test]
    fn two_vertices() {
        let g = WeightedGraph::new(2, vec![(0, 1, 3.0)]).unwrap();
        let run = embed_full(&g, 3, 0.5).unwrap();
        assert_eq!(run.embedding.dim, run.dimension_formula());
        let rep = distortion_report(&all_pairs(&g), &run.embedding.coords, PairSelection::All);
        assert!(rep.expansion <= 2.0);
        assert!(rep.contraction <= run.embedding.xi);
    }

    #[test]
    fn single_vertex_is_empty() {
        let g = WeightedGraph::new(1, vec![]).unwrap();
        let run = embed_full(&g, 3, 0.5).unwrap();
        assert_eq!(run.embedding.dim, 0);
        assert_eq!(run.dimension_formula(), 0);
    }

    #[test]
    fn weighted_path() {
        let g = WeightedGraph::new(6, (0..5).map(|i| (i, i + 1, 1.0 + i as f64)).collect()).unwrap();
        let run = embed_full(&g, 3, 0.5).unwrap();
        assert_eq!(run.embedding.dim, run.dimension_formula());
        let rep = distortion_report(&all_pairs(&g), &run.embedding.coords, PairSelection::All);
        assert!(rep.expansion <= 2.0 + 1e-9);
        assert!(rep.contraction <= run.embedding.xi);
    }
}

use serde::{Deserialize, Serialize};

use super::{distortion_report, EmbedError, Embedding, PairSelection};
use crate::graph::{all_pairs, distance_extremes, truncate_weights, WeightedGraph};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationReport {
    pub alpha: f64,
    /// `d_trunc <= min(d, n * alpha)` for all pairs.
    pub upper_ok: bool,
    /// `d_trunc >= (1 - n / s) d` for pairs with `d` in `[alpha / s, alpha]`.
    pub lower_ok: bool,
    /// Aspect ratio at most `n * s^2`.
    pub aspect_ok: bool,
    pub aspect_ratio: f64,
    pub failures: Vec<String>,
}

impl TruncationReport {
    pub fn passes(&self) -> bool {
        self.upper_ok && self.lower_ok && self.aspect_ok
    }
}

/// Checks the three distance properties of a truncated graph against the
/// original distances.
pub fn check_truncation(
    g: &WeightedGraph,
    apsp: &[Vec<f64>],
    truncated: &WeightedGraph,
    alpha: f64,
    s: f64,
) -> TruncationReport {
    let n = g.n();
    let nf = n as f64;
    let t = all_pairs(truncated);
    let mut rep = TruncationReport {
        alpha,
        upper_ok: true,
        lower_ok: true,
        aspect_ok: true,
        aspect_ratio: 0.0,
        failures: Vec::new(),
    };
    let le = |a: f64, b: f64| a <= b + 1e-9 * b.abs();
    for x in 0..n {
        for y in x + 1..n {
            let (d, dt) = (apsp[x][y], t[x][y]);
            if !le(dt, d.min(nf * alpha)) {
                rep.upper_ok = false;
                rep.failures.push(format!("pair ({x}, {y}): {dt} > min({d}, n alpha)"));
            }
            if d >= alpha / s && d <= alpha && !le((1.0 - nf / s) * d, dt) {
                rep.lower_ok = false;
                rep.failures.push(format!("pair ({x}, {y}): {dt} < (1 - n/s) {d}"));
            }
        }
    }
    if let Some((max, min)) = distance_extremes(&t) {
        rep.aspect_ratio = max / min;
        if !le(rep.aspect_ratio, nf * s * s) {
            rep.aspect_ok = false;
            rep.failures.push(format!("aspect ratio {} > n s^2", rep.aspect_ratio));
        }
    }
    rep
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleRun {
    pub index: usize,
    pub alpha: f64,
    pub dim: usize,
    pub truncation: TruncationReport,
    /// Measured contraction of this scale's embedding against the truncated
    /// distances (pairs at positive truncated distance).
    pub contraction: f64,
    pub expansion: f64,
    /// Contraction the scale's embedding claims.
    pub claimed_xi: f64,
}

#[derive(Debug, Clone)]
pub struct AspectRun {
    pub embedding: Embedding,
    pub s: f64,
    pub scales: Vec<ScaleRun>,
    /// Largest measured per-scale contraction.
    pub inner_contraction: f64,
}

/// Removes the dependence on the aspect ratio: embeds each truncated graph
/// `G_i` (weights capped at `alpha_i = maxd / s^i`, tiny ones zeroed) with
/// `embed_at`, sums embeddings whose index agrees mod 3, and concatenates the
/// three sums. `s = 8 rho beta n / epsilon`.
pub fn remove_aspect(
    g: &WeightedGraph,
    embed_at: impl Fn(&WeightedGraph) -> Result<Embedding, EmbedError>,
    rho: f64,
    beta: f64,
    epsilon: f64,
) -> Result<AspectRun, EmbedError> {
    if !(epsilon > 0.0 && epsilon < 0.5) || !(rho > 0.0) || !(beta > 0.0) {
        return Err(EmbedError::BadParameters(format!(
            "need 0 < epsilon < 1/2, rho > 0, beta > 0 (got {epsilon}, {rho}, {beta})"
        )));
    }
    let n = g.n();
    let apsp = all_pairs(g);
    let s = 8.0 * rho * beta * n as f64 / epsilon;
    let Some((maxd, mind)) = distance_extremes(&apsp) else {
        return Ok(AspectRun {
            embedding: Embedding::zero((0..n).collect(), (1.0 + epsilon) * rho, (1.0 + epsilon) * beta),
            s,
            scales: Vec::new(),
            inner_contraction: 0.0,
        });
    };
    let mut alphas = vec![maxd];
    loop {
        let next = alphas.last().expect("non-empty") / s;
        if next < mind {
            break;
        }
        alphas.push(next);
    }

    let mut classes: [Vec<Vec<f64>>; 3] = [vec![Vec::new(); n], vec![Vec::new(); n], vec![Vec::new(); n]];
    let mut scales = Vec::with_capacity(alphas.len());
    for (i, &alpha) in alphas.iter().enumerate() {
        let gi = truncate_weights(g, alpha, s)?;
        let truncation = check_truncation(g, &apsp, &gi, alpha, s);
        let e = embed_at(&gi)?;
        let inner = distortion_report(&all_pairs(&gi), &e.coords, PairSelection::All);
        let sum = &mut classes[i % 3];
        for (acc, row) in sum.iter_mut().zip(&e.coords) {
            if acc.len() < row.len() {
                acc.resize(row.len(), 0.0);
            }
            for (a, x) in acc.iter_mut().zip(row) {
                *a += x;
            }
        }
        scales.push(ScaleRun {
            index: i,
            alpha,
            dim: e.dim,
            truncation,
            contraction: inner.contraction,
            expansion: inner.expansion,
            claimed_xi: e.xi,
        });
    }
    let mut coords = vec![Vec::new(); n];
    for class in &classes {
        let width = class.iter().map(Vec::len).max().unwrap_or(0);
        for (row, part) in coords.iter_mut().zip(class) {
            row.extend(part);
            row.extend(std::iter::repeat_n(0.0, width - part.len()));
        }
    }
    let dim = coords.first().map_or(0, Vec::len);
    let inner_contraction = scales.iter().map(|s| s.contraction).fold(0.0, f64::max);
    Ok(AspectRun {
        embedding: Embedding {
            vertices: (0..n).collect(),
            coords,
            dim,
            rho: (1.0 + epsilon) * rho,
            xi: (1.0 + epsilon) * beta,
        },
        s,
        scales,
        inner_contraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::embed_full;

    #[test]
    fn truncation_properties_on_spread_path() {
        let g = WeightedGraph::new(4, vec![(0, 1, 1.0), (1, 2, 1000.0), (2, 3, 1e6)]).unwrap();
        let apsp = all_pairs(&g);
        for alpha in [1e6, 1e3, 1.0] {
            let t = truncate_weights(&g, alpha, 50.0).unwrap();
            let rep = check_truncation(&g, &apsp, &t, alpha, 50.0);
            assert!(rep.passes(), "{:?}", rep.failures);
        }
    }

    #[test]
    fn single_scale_when_spread_is_small() {
        let g = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let run = remove_aspect(&g, |h| Ok(embed_full(h, 3, 0.4)?.embedding), 2.0, 10.0, 0.4).unwrap();
        assert_eq!(run.scales.len(), 1);
        let direct = embed_full(&g, 3, 0.4).unwrap().embedding;
        // one scale: the class-0 block is that embedding, the others are empty
        assert_eq!(run.embedding.coords, direct.coords);
    }

    #[test]
    fn spread_path_end_to_end() {
        let g = WeightedGraph::new(5, vec![(0, 1, 1.0), (1, 2, 300.0), (2, 3, 9e4), (3, 4, 2.7e7)]).unwrap();
        let xi = crate::cover::nominal_beta(3, 1) * 1.4f64.powi(3);
        let run = remove_aspect(&g, |h| Ok(embed_full(h, 3, 0.4)?.embedding), 2.0, xi, 0.4).unwrap();
        assert!(run.scales.len() >= 2);
        for sc in &run.scales {
            assert!(sc.truncation.passes(), "{:?}", sc.truncation.failures);
        }
        let rep = distortion_report(&all_pairs(&g), &run.embedding.coords, PairSelection::All);
        assert!(rep.expansion <= run.embedding.rho * (1.0 + 1e-9));
        assert!(rep.contraction <= (1.0 + 0.4) * run.inner_contraction * (1.0 + 1e-9));
    }
}

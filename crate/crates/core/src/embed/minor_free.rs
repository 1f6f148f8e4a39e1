use serde::{Deserialize, Serialize};

use super::{multiscale, EmbedError, Embedding, MultiScaleRun};
use crate::cover::{nominal_beta, preset_q, Preset};
use crate::graph::{subdivide, WeightedGraph};

/// Largest subdivided graph the pipeline accepts.
pub const SUBDIVISION_CAP: usize = 2000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    /// Padding factor the preset promises.
    pub target_padding: f64,
    /// Largest `scale / rho*` over the covers built on the subdivided graph.
    pub measured_padding: f64,
    pub gate_passed: bool,
    /// Contraction bound that follows from the gate outcome.
    pub contraction_bound: f64,
    pub expansion_bound: f64,
}

#[derive(Debug, Clone)]
pub struct MinorFreeRun {
    pub embedding: Embedding,
    pub pieces: usize,
    pub subdivided: WeightedGraph,
    pub inner: MultiScaleRun,
    pub certificate: Certificate,
}

/// Subdivides every edge into `pieces` (default `ceil(1/epsilon)`) equal
/// edges, runs the multi-scale embedding with `q = ceil(8r/epsilon)` on the
/// subdivided graph, and keeps the original vertices.
///
/// The contraction `(1 + epsilon)^2 (3 + 8 epsilon)` is claimed only when
/// every cover built on the subdivided graph pads by the preset factor;
/// otherwise the claim falls back to the generic `beta (1 + epsilon)^3`.
pub fn embed_minor_free_3eps(
    g: &WeightedGraph,
    r: usize,
    epsilon: f64,
    pieces: Option<usize>,
) -> Result<MinorFreeRun, EmbedError> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(EmbedError::BadParameters(format!("need 0 < epsilon <= 1/2, got {epsilon}")));
    }
    let pieces = pieces.unwrap_or_else(|| (1.0 / epsilon - 1e-9).ceil() as usize);
    if pieces == 0 {
        return Err(EmbedError::BadParameters("subdivision factor must be >= 1".into()));
    }
    let vertices = g.n() + g.edges().len() * (pieces - 1);
    if vertices > SUBDIVISION_CAP {
        return Err(EmbedError::TooLarge { vertices, cap: SUBDIVISION_CAP });
    }
    let sub = subdivide(g, pieces)?;
    let q = preset_q(Preset::B, r, epsilon)?;
    let inner = multiscale(&sub.graph, r, q, epsilon, Some(&sub.original))?;
    let target_padding = nominal_beta(r, q);
    let measured_padding = inner.measured_padding();
    let gate_passed = measured_padding <= target_padding * (1.0 + 1e-9);
    let contraction_bound = if gate_passed {
        (1.0 + epsilon).powi(2) * (3.0 + 8.0 * epsilon)
    } else {
        inner.scheme.beta * (1.0 + epsilon).powi(3)
    };
    let mut embedding = inner.embedding.clone();
    embedding.rho = 1.0 + epsilon;
    embedding.xi = contraction_bound;
    Ok(MinorFreeRun {
        embedding,
        pieces,
        subdivided: sub.graph,
        certificate: Certificate {
            target_padding,
            measured_padding,
            gate_passed,
            contraction_bound,
            expansion_bound: 1.0 + epsilon,
        },
        inner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{distortion_report, PairSelection};
    use crate::graph::all_pairs;

    #[test]
    fn single_edge() {
        let g = WeightedGraph::new(2, vec![(0, 1, 2.0)]).unwrap();
        let run = embed_minor_free_3eps(&g, 3, 0.5, None).unwrap();
        assert_eq!(run.pieces, 2);
        assert_eq!(run.subdivided.n(), 3);
        let rep = distortion_report(&all_pairs(&g), &run.embedding.coords, PairSelection::All);
        assert!(rep.expansion <= 1.5 + 1e-9);
        assert!(rep.contraction.is_finite());
    }

    #[test]
    fn refuses_oversized_subdivision() {
        let edges = (0..1500).map(|i| (i, i + 1, 1.0)).collect();
        let g = WeightedGraph::new(1501, edges).unwrap();
        assert!(matches!(
            embed_minor_free_3eps(&g, 3, 0.5, None),
            Err(EmbedError::TooLarge { vertices: 3001, .. })
        ));
    }
}

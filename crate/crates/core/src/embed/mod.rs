//! Embeddings into `l_inf`: the per-ladder embedding, the multi-scale
//! embedding, aspect-ratio removal, the subdivided variant for minor-free
//! graphs, and exact distortion measurement.

mod aspect;
mod distortion;
mod hierarchy;
mod minor_free;
mod multiscale;

pub use aspect::{check_truncation, remove_aspect, AspectRun, ScaleRun, TruncationReport};
pub use distortion::{distortion_report, pair_distances, DistortionReport, PairSelection};
pub use hierarchy::{boundary_distances, embed_hierarchy, HierarchyEmbedding};
pub use minor_free::{embed_minor_free_3eps, Certificate, MinorFreeRun, SUBDIVISION_CAP};
pub use multiscale::{embed_full, multiscale, MultiScaleRun, ScaleLadders};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::CoverError;
use crate::graph::GraphError;
use crate::laminar::LadderError;
use crate::prefix_code::CodeError;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Ladder(#[from] LadderError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("levels are not laminar: level {level} splits a lower cluster at vertex {vertex}")]
    NotLaminar { level: usize, vertex: usize },
    #[error("level {level} is not a partition of the vertex set")]
    NotPartition { level: usize },
    #[error(
        "subdivided graph would have {vertices} vertices, above the cap of {cap}; \
         use a larger epsilon or a smaller graph"
    )]
    TooLarge { vertices: usize, cap: usize },
}

/// Coordinates for a list of vertices, with the claimed expansion `rho` and
/// contraction `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub vertices: Vec<usize>,
    pub coords: Vec<Vec<f64>>,
    pub dim: usize,
    pub rho: f64,
    pub xi: f64,
}

impl Embedding {
    pub fn zero(vertices: Vec<usize>, rho: f64, xi: f64) -> Self {
        let coords = vec![Vec::new(); vertices.len()];
        Embedding { vertices, coords, dim: 0, rho, xi }
    }
}

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PairSelection {
    All,
    /// `count` pairs drawn uniformly (with replacement) from a seeded stream.
    Sample { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub pairs: usize,
    /// Largest `norm / d`.
    pub expansion: f64,
    /// Largest `d / norm`; `inf` if some pair at positive distance collapses.
    pub contraction: f64,
    pub distortion: f64,
    pub worst_expansion: Option<(usize, usize)>,
    pub worst_contraction: Option<(usize, usize)>,
    pub collapsed_pairs: usize,
}

impl DistortionReport {
    pub fn within(&self, rho: f64, xi: f64) -> bool {
        self.expansion <= rho * (1.0 + 1e-9) && self.contraction <= xi * (1.0 + 1e-9)
    }
}

/// Square distance matrix between the listed vertices.
pub fn pair_distances(apsp: &[Vec<f64>], vertices: &[usize]) -> Vec<Vec<f64>> {
    vertices
        .iter()
        .map(|&a| vertices.iter().map(|&b| apsp[a][b]).collect())
        .collect()
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Exact `l_inf` distortion of `coords` against the square matrix `dist`
/// (row `t` of `coords` matches row `t` of `dist`). Pairs at distance zero
/// only count toward expansion if their images differ.
pub fn distortion_report(dist: &[Vec<f64>], coords: &[Vec<f64>], sel: PairSelection) -> DistortionReport {
    let m = coords.len();
    let mut rep = DistortionReport {
        pairs: 0,
        expansion: 0.0,
        contraction: 0.0,
        distortion: 0.0,
        worst_expansion: None,
        worst_contraction: None,
        collapsed_pairs: 0,
    };
    let mut visit = |x: usize, y: usize| {
        rep.pairs += 1;
        let d = dist[x][y];
        let norm = linf(&coords[x], &coords[y]);
        let exp = if d > 0.0 {
            norm / d
        } else if norm > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if exp > rep.expansion || rep.worst_expansion.is_none() {
            rep.expansion = exp;
            rep.worst_expansion = Some((x, y));
        }
        if d > 0.0 {
            let con = if norm > 0.0 {
                d / norm
            } else {
                rep.collapsed_pairs += 1;
                f64::INFINITY
            };
            if con > rep.contraction || rep.worst_contraction.is_none() {
                rep.contraction = con;
                rep.worst_contraction = Some((x, y));
            }
        }
    };
    match sel {
        PairSelection::All => {
            for x in 0..m {
                for y in x + 1..m {
                    visit(x, y);
                }
            }
        }
        PairSelection::Sample { count, seed } => {
            if m >= 2 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..count {
                    let x = rng.gen_range(0..m);
                    let mut y = rng.gen_range(0..m - 1);
                    if y >= x {
                        y += 1;
                    }
                    visit(x.min(y), x.max(y));
                }
            }
        }
    }
    rep.distortion = if rep.contraction.is_infinite() {
        f64::INFINITY
    } else {
        rep.expansion * rep.contraction
    };
    rep
}

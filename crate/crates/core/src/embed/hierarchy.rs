use serde::{Deserialize, Serialize};

use super::EmbedError;
use crate::prefix_code::build_code;
use crate::util::{ceil_log2, ceil_log2_ratio};

/// Distance from each vertex to the outside of its cluster; `inf` when the
/// cluster is everything.
pub fn boundary_distances(apsp: &[Vec<f64>], partition: &[Vec<usize>]) -> Vec<f64> {
    let n = apsp.len();
    let mut owner = vec![usize::MAX; n];
    for (k, cl) in partition.iter().enumerate() {
        for &v in cl {
            owner[v] = k;
        }
    }
    (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| owner[u] != owner[v])
                .map(|u| apsp[v][u])
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyEmbedding {
    /// Row `t` embeds `points[t]`.
    pub coords: Vec<Vec<f64>>,
    pub dim: usize,
}

struct Ctx {
    owner: Vec<Vec<usize>>,
    boundary: Vec<Vec<f64>>,
}

fn dim_for(size: usize, levels: usize) -> usize {
    2 * ceil_log2(size.max(1)) as usize + 2 * levels
}

/// Embeds `points` using a refinement chain of partitions of all vertices
/// (`levels[0]` finest). Output dimension is `2 ceil(log2 |points|) + 2 k`
/// for `k` levels.
///
/// The coarsest level that splits the current point set labels its clusters
/// with a prefix code weighted by point counts; a point's coordinates are its
/// cluster's padded word scaled by its boundary distance at that level,
/// followed by the recursive embedding of its cluster on the finer levels.
pub fn embed_hierarchy(
    apsp: &[Vec<f64>],
    levels: &[Vec<Vec<usize>>],
    points: &[usize],
) -> Result<HierarchyEmbedding, EmbedError> {
    let n = apsp.len();
    let mut owner = Vec::with_capacity(levels.len());
    for (level, part) in levels.iter().enumerate() {
        let mut o = vec![usize::MAX; n];
        for (k, cl) in part.iter().enumerate() {
            for &v in cl {
                if v >= n || o[v] != usize::MAX {
                    return Err(EmbedError::NotPartition { level });
                }
                o[v] = k;
            }
        }
        if o.contains(&usize::MAX) {
            return Err(EmbedError::NotPartition { level });
        }
        owner.push(o);
    }
    for level in 1..owner.len() {
        let mut up = vec![usize::MAX; levels[level - 1].len()];
        for v in 0..n {
            let k = owner[level - 1][v];
            if up[k] == usize::MAX {
                up[k] = owner[level][v];
            } else if up[k] != owner[level][v] {
                return Err(EmbedError::NotLaminar { level, vertex: v });
            }
        }
    }
    let boundary = levels.iter().map(|p| boundary_distances(apsp, p)).collect();
    let ctx = Ctx { owner, boundary };
    let mut sorted: Vec<usize> = points.to_vec();
    sorted.sort_unstable();
    let dim = dim_for(points.len(), levels.len());
    let rows = embed_rec(&ctx, &sorted, levels.len())?;
    let mut coords = vec![Vec::new(); points.len()];
    for (t, &p) in points.iter().enumerate() {
        let at = sorted.binary_search(&p).expect("point present");
        coords[t] = rows[at].clone();
    }
    Ok(HierarchyEmbedding { coords, dim })
}

/// Rows for the sorted points `x`, using levels `0..top`.
fn embed_rec(ctx: &Ctx, x: &[usize], top: usize) -> Result<Vec<Vec<f64>>, EmbedError> {
    let dim = dim_for(x.len(), top);
    let mut rows = vec![vec![0.0; dim]; x.len()];
    if x.len() <= 1 {
        return Ok(rows);
    }
    let Some(k) = (0..top).rev().find(|&k| x.iter().any(|&v| ctx.owner[k][v] != ctx.owner[k][x[0]])) else {
        return Ok(rows);
    };
    // clusters in order of their lowest point
    let mut keys: Vec<usize> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: Vec<usize> = Vec::with_capacity(x.len());
    for &v in x {
        let key = ctx.owner[k][v];
        let g = match keys.iter().position(|&c| c == key) {
            Some(g) => g,
            None => {
                keys.push(key);
                groups.push(Vec::new());
                keys.len() - 1
            }
        };
        groups[g].push(v);
        slot.push(g);
    }
    let weights: Vec<f64> = groups.iter().map(|g| g.len() as f64).collect();
    let code = build_code(&weights)?;
    let mut sub_rows: Vec<Vec<Vec<f64>>> = Vec::with_capacity(groups.len());
    for g in &groups {
        sub_rows.push(embed_rec(ctx, g, k)?);
    }
    let mut seen = vec![0usize; groups.len()];
    for (t, &v) in x.iter().enumerate() {
        let g = slot[t];
        let word_len = 2 * ceil_log2_ratio(x.len() as f64, groups[g].len() as f64) as usize;
        let mut word = code.words[g].clone();
        word.resize(word_len.max(word.len()), 1);
        let b = ctx.boundary[k][v];
        let row = &mut rows[t];
        for (i, &s) in word.iter().enumerate() {
            row[i] = s as f64 * b;
        }
        let sub = &sub_rows[g][seen[g]];
        seen[g] += 1;
        row[word.len()..word.len() + sub.len()].copy_from_slice(sub);
    }
    Ok(rows)
}

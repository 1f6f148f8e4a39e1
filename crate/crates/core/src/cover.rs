//! Strong sparse partition covers built from a buffered cop decomposition,
//! the two parameter presets, the cover validator, and a scale-parametrized
//! cover scheme used by the embedding pipeline.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bcd::{build_bcd, build_dag, BcdError, BufferedCopDecomposition, SupernodeDag};
use crate::graph::{all_pairs, dijkstra, mask_of, set_ball, strong_diameter, WeightedGraph};
use crate::util::binomial;

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Bcd(#[from] BcdError),
    #[error("supernode coloring used {used} classes, bound is {bound}")]
    TooManyClasses { used: usize, bound: u128 },
    #[error("net of supernode {eta} needed {used} colors, bound is {bound}")]
    TooManyNetColors { eta: usize, used: usize, bound: f64 },
    #[error("enlarged supernodes {a} and {b} of class {class} overlap at vertex {vertex}")]
    Overlap { class: usize, a: usize, b: usize, vertex: usize },
    #[error("cover at scale {scale} has diameter {diam}; padding factor {needed_beta} would be required")]
    ScaleMiss { scale: f64, diam: f64, needed_beta: f64 },
    #[error("no padding factor fit every scale after {attempts} attempts (last tried {beta})")]
    NoFit { attempts: usize, beta: f64 },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed cover json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Parameters a cover was built with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverProvenance {
    pub r: usize,
    pub q: usize,
    pub target_delta: f64,
    pub gamma: f64,
    pub w: usize,
    /// Radius measured on the decomposition.
    pub radius: f64,
    /// Radius used in the formulas: the measured radius, raised to `gamma` if smaller.
    pub radius_used: f64,
    pub classes: usize,
    pub class_bound: u128,
    pub max_net_colors: usize,
    /// Partition-count bound with the `4w` factor.
    pub s_bound: f64,
    /// Same bound with `4r` in place of `4w`.
    pub s_bound_4r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCover {
    pub beta: f64,
    pub s: usize,
    pub diam: f64,
    pub partitions: Vec<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<CoverProvenance>,
}

impl PartitionCover {
    /// Cover with the single partition `{V}`.
    pub fn trivial(n: usize, diam: f64) -> Self {
        PartitionCover {
            beta: 1.0,
            s: 1,
            diam,
            partitions: vec![vec![(0..n).collect()]],
            provenance: None,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("cover serializes")
    }

    pub fn load(path: &Path) -> Result<Self, CoverError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CoverError::Io { path: path.display().to_string(), source })?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// `q = 1`.
    A,
    /// `q = ceil(8r / epsilon)`.
    B,
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Preset::A),
            "B" | "b" => Ok(Preset::B),
            _ => Err(format!("unknown preset {s:?}; expected A or B")),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::A => "A",
            Preset::B => "B",
        })
    }
}

pub fn preset_q(preset: Preset, r: usize, epsilon: f64) -> Result<usize, CoverError> {
    match preset {
        Preset::A => Ok(1),
        Preset::B => {
            if !(epsilon > 0.0 && epsilon <= 0.5) {
                return Err(CoverError::BadParameters(format!(
                    "preset B needs 0 < epsilon <= 1/2, got {epsilon}"
                )));
            }
            Ok((8.0 * r as f64 / epsilon - 1e-9).ceil() as usize)
        }
    }
}

/// Nodes that reach `eta` along at most `q` arcs, `eta` included, sorted.
fn reverse_ball(rev: &[Vec<usize>], eta: usize, q: usize) -> Vec<usize> {
    let mut seen = vec![false; rev.len()];
    seen[eta] = true;
    let mut frontier = vec![eta];
    let mut out = vec![eta];
    for _ in 0..q {
        let mut next = Vec::new();
        for &v in &frontier {
            for &u in &rev[v] {
                if !seen[u] {
                    seen[u] = true;
                    next.push(u);
                    out.push(u);
                }
            }
        }
        frontier = next;
    }
    out.sort_unstable();
    out
}

/// Splits supernodes into classes with no two members nearby, i.e. joined by
/// a directed path of at most `2q - 1` arcs. Each class is filled greedily in
/// increasing id order, so ancestors are considered before descendants.
pub fn color_supernodes(dag: &SupernodeDag, w: usize, q: usize) -> Result<Vec<Vec<usize>>, CoverError> {
    if q == 0 {
        return Err(CoverError::BadParameters("q must be >= 1".into()));
    }
    let k = dag.len();
    let reach = 2 * q - 1;
    let mut rev = vec![Vec::new(); k];
    for (a, outs) in dag.out.iter().enumerate() {
        for &b in outs {
            rev[b].push(a);
        }
    }
    let near: Vec<Vec<usize>> = (0..k)
        .map(|v| {
            let mut s = crate::bcd::directed_ball(dag, v, reach);
            s.extend(reverse_ball(&rev, v, reach));
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let mut assigned = vec![false; k];
    let mut left = k;
    let mut classes = Vec::new();
    while left > 0 {
        let mut blocked = vec![false; k];
        let mut class = Vec::new();
        for v in 0..k {
            if assigned[v] || blocked[v] {
                continue;
            }
            class.push(v);
            assigned[v] = true;
            left -= 1;
            for &u in &near[v] {
                blocked[u] = true;
            }
        }
        classes.push(class);
    }
    let bound = binomial((w + reach) as u64, w as u64);
    if classes.len() as u128 > bound {
        return Err(CoverError::TooManyClasses { used: classes.len(), bound });
    }
    Ok(classes)
}

/// Closed ball of radius `q * gamma` around a supernode inside its domain.
pub fn enlarge(g: &WeightedGraph, d: &BufferedCopDecomposition, eta: usize, q: usize) -> Vec<usize> {
    let s = &d.supernodes[eta];
    let mask = mask_of(g.n(), &s.domain);
    set_ball(g, &s.vertices, q as f64 * d.target.gamma, Some(&mask))
}

/// Upper bound on net colors for one enlarged supernode.
pub fn net_color_bound(w: usize, q: usize, gamma: f64, radius: f64) -> f64 {
    4.0 * w as f64 * (2.0 + q as f64 * gamma / radius)
}

/// Partitions of an enlarged supernode `hat` into balls of radius
/// `2 * radius + q * gamma` around colored skeleton net points, plus
/// singletons.
pub fn partition_enlarged(
    g: &WeightedGraph,
    d: &BufferedCopDecomposition,
    eta: usize,
    hat: &[usize],
    q: usize,
    radius: f64,
) -> Result<Vec<Vec<Vec<usize>>>, CoverError> {
    let s = &d.supernodes[eta];
    let mask = mask_of(g.n(), hat);
    let qg = q as f64 * d.target.gamma;
    let ball_radius = 2.0 * radius + qg;

    let (from_root, _) = dijkstra(g, &[s.skeleton_root], Some(&mask));
    let mut order = s.skeleton_vertices();
    order.sort_by(|&a, &b| from_root[a].total_cmp(&from_root[b]).then(a.cmp(&b)));

    let mut net: Vec<usize> = Vec::new();
    let mut fields: Vec<Vec<f64>> = Vec::new();
    let mut to_net = vec![f64::INFINITY; g.n()];
    for x in order {
        if !g.gt(to_net[x], radius) {
            continue;
        }
        let (f, _) = dijkstra(g, &[x], Some(&mask));
        for &v in hat {
            to_net[v] = to_net[v].min(f[v]);
        }
        net.push(x);
        fields.push(f);
    }

    let mut color = vec![0usize; net.len()];
    let mut used = 0;
    for i in 0..net.len() {
        let taken: Vec<usize> = (0..i)
            .filter(|&j| g.le(fields[j][net[i]], 2.0 * ball_radius))
            .map(|j| color[j])
            .collect();
        color[i] = (0..).find(|c| !taken.contains(c)).expect("a free color exists");
        used = used.max(color[i] + 1);
    }
    let bound = net_color_bound(d.target.w, q, d.target.gamma, radius);
    if used as f64 > bound + 1e-9 {
        return Err(CoverError::TooManyNetColors { eta, used, bound });
    }

    let mut parts = Vec::with_capacity(used);
    for c in 0..used {
        let mut covered = vec![false; g.n()];
        let mut clusters = Vec::new();
        for (i, f) in fields.iter().enumerate() {
            if color[i] != c {
                continue;
            }
            let cl: Vec<usize> = hat.iter().copied().filter(|&v| g.le(f[v], ball_radius)).collect();
            for &v in &cl {
                covered[v] = true;
            }
            clusters.push(cl);
        }
        for &v in hat {
            if !covered[v] {
                clusters.push(vec![v]);
            }
        }
        parts.push(canonical(clusters));
    }
    Ok(parts)
}

fn canonical(mut clusters: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Builds a strong sparse partition cover: decomposition with
/// `(delta, delta / r, r - 1)`, supernode classes, enlarged supernodes and
/// their net partitions, assembled per (class, net color).
pub fn build_cover(g: &WeightedGraph, r: usize, q: usize, delta: f64) -> Result<PartitionCover, CoverError> {
    if r < 2 || q == 0 || !(delta > 0.0) || !delta.is_finite() {
        return Err(CoverError::BadParameters(format!(
            "need r >= 2, q >= 1, delta > 0 (got r={r}, q={q}, delta={delta})"
        )));
    }
    let gamma = delta / r as f64;
    let w = r - 1;
    let d = build_bcd(g, delta, gamma, w)?;
    build_cover_from(g, &d, r, q)
}

/// Cover assembly over an existing decomposition.
pub fn build_cover_from(
    g: &WeightedGraph,
    d: &BufferedCopDecomposition,
    r: usize,
    q: usize,
) -> Result<PartitionCover, CoverError> {
    let n = g.n();
    let gamma = d.target.gamma;
    let w = d.target.w;
    let dag = build_dag(g, d)?;
    let classes = color_supernodes(&dag, w, q)?;
    let radius_used = d.measured.radius.max(gamma);
    let qg = q as f64 * gamma;

    let mut partitions = Vec::new();
    let mut max_net_colors = 0;
    for (ci, class) in classes.iter().enumerate() {
        let mut owner = vec![usize::MAX; n];
        let mut per_node = Vec::new();
        for &eta in class {
            let hat = enlarge(g, d, eta, q);
            for &v in &hat {
                if owner[v] != usize::MAX {
                    return Err(CoverError::Overlap { class: ci, a: owner[v], b: eta, vertex: v });
                }
                owner[v] = eta;
            }
            let parts = partition_enlarged(g, d, eta, &hat, q, radius_used)?;
            max_net_colors = max_net_colors.max(parts.len());
            per_node.push(parts);
        }
        let count = per_node.iter().map(Vec::len).max().unwrap_or(0);
        for j in 0..count {
            let mut covered = vec![false; n];
            let mut clusters = Vec::new();
            for parts in &per_node {
                if let Some(p) = parts.get(j) {
                    for c in p {
                        for &v in c {
                            covered[v] = true;
                        }
                        clusters.push(c.clone());
                    }
                }
            }
            clusters.extend((0..n).filter(|&v| !covered[v]).map(|v| vec![v]));
            partitions.push(canonical(clusters));
        }
    }

    let class_bound = binomial((w + 2 * q - 1) as u64, w as u64);
    let s_bound = class_bound as f64 * net_color_bound(w, q, gamma, radius_used);
    let s_bound_4r = class_bound as f64 * net_color_bound(r, q, gamma, radius_used);
    Ok(PartitionCover {
        beta: 4.0 * (2.0 * radius_used / qg + 1.0),
        s: partitions.len(),
        diam: 2.0 * (2.0 * radius_used + qg),
        partitions,
        provenance: Some(CoverProvenance {
            r,
            q,
            target_delta: d.target.delta,
            gamma,
            w,
            radius: d.measured.radius,
            radius_used,
            classes: classes.len(),
            class_bound,
            max_net_colors,
            s_bound,
            s_bound_4r,
        }),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverReport {
    pub partitions_ok: bool,
    pub diameter_ok: bool,
    pub padding_ok: bool,
    pub count_ok: bool,
    pub max_strong_diameter: f64,
    pub padding_radius: f64,
    /// Largest radius whose open ball around every vertex fits in some cluster.
    pub rho_star: f64,
    pub unpadded: Vec<usize>,
    pub failures: Vec<String>,
}

impl CoverReport {
    pub fn passes(&self) -> bool {
        self.partitions_ok && self.diameter_ok && self.padding_ok && self.count_ok
    }
}

pub fn verify_cover(g: &WeightedGraph, c: &PartitionCover) -> CoverReport {
    verify_cover_with(g, &all_pairs(g), c)
}

/// Exact check of partition structure, strong diameter, padding at radius
/// `diam / beta`, and partition count against `s`.
pub fn verify_cover_with(g: &WeightedGraph, apsp: &[Vec<f64>], c: &PartitionCover) -> CoverReport {
    let n = g.n();
    let mut rep = CoverReport {
        partitions_ok: true,
        diameter_ok: true,
        padding_ok: true,
        count_ok: c.partitions.len() <= c.s && !c.partitions.is_empty(),
        max_strong_diameter: 0.0,
        padding_radius: c.diam / c.beta,
        rho_star: f64::INFINITY,
        unpadded: Vec::new(),
        failures: Vec::new(),
    };
    if !rep.count_ok {
        rep.failures
            .push(format!("{} partitions but s = {}", c.partitions.len(), c.s));
    }

    let mut index: Vec<Vec<usize>> = Vec::with_capacity(c.partitions.len());
    for (p, part) in c.partitions.iter().enumerate() {
        let mut cl = vec![usize::MAX; n];
        for (k, cluster) in part.iter().enumerate() {
            for &v in cluster {
                if v >= n || cl[v] != usize::MAX {
                    rep.partitions_ok = false;
                    rep.failures
                        .push(format!("partition {p}: vertex {v} out of range or repeated"));
                } else {
                    cl[v] = k;
                }
            }
        }
        if let Some(v) = cl.iter().position(|&k| k == usize::MAX) {
            rep.partitions_ok = false;
            rep.failures.push(format!("partition {p}: vertex {v} uncovered"));
        }
        index.push(cl);
    }
    if !rep.partitions_ok {
        rep.diameter_ok = false;
        rep.padding_ok = false;
        return rep;
    }

    let mut seen: HashMap<&[usize], f64> = HashMap::new();
    for (p, part) in c.partitions.iter().enumerate() {
        for (k, cluster) in part.iter().enumerate() {
            if cluster.len() <= 1 {
                continue;
            }
            let dia = *seen
                .entry(cluster.as_slice())
                .or_insert_with(|| strong_diameter(g, cluster));
            rep.max_strong_diameter = rep.max_strong_diameter.max(dia);
            if !g.le(dia, c.diam) {
                rep.diameter_ok = false;
                rep.failures.push(format!(
                    "partition {p} cluster {k} (min vertex {}): strong diameter {dia} > {}",
                    cluster[0], c.diam
                ));
            }
        }
    }

    for v in 0..n {
        let mut best: f64 = 0.0;
        let mut padded = false;
        for cl in &index {
            let mine = cl[v];
            let mut escape = f64::INFINITY;
            let mut inside = true;
            for u in 0..n {
                if cl[u] != mine {
                    escape = escape.min(apsp[v][u]);
                    if g.le(apsp[v][u], rep.padding_radius) {
                        inside = false;
                    }
                }
            }
            best = best.max(escape);
            padded |= inside;
        }
        rep.rho_star = rep.rho_star.min(best);
        if !padded {
            rep.padding_ok = false;
            rep.unpadded.push(v);
            rep.failures.push(format!(
                "vertex {v}: no cluster holds its ball of radius {}",
                rep.padding_radius
            ));
        }
    }
    rep
}

/// Largest `rho` such that every vertex has all vertices closer than `rho`
/// inside one cluster of some partition; `inf` if some partition is `{V}`.
pub fn rho_star(apsp: &[Vec<f64>], partitions: &[Vec<Vec<usize>>]) -> f64 {
    let n = apsp.len();
    let owners: Vec<Vec<usize>> = partitions
        .iter()
        .map(|part| {
            let mut o = vec![usize::MAX; n];
            for (k, cl) in part.iter().enumerate() {
                for &v in cl {
                    o[v] = k;
                }
            }
            o
        })
        .collect();
    let mut rho = f64::INFINITY;
    for v in 0..n {
        let mut best: f64 = 0.0;
        for o in &owners {
            let escape = (0..n)
                .filter(|&u| o[u] != o[v])
                .map(|u| apsp[v][u])
                .fold(f64::INFINITY, f64::min);
            best = best.max(escape);
        }
        rho = rho.min(best);
    }
    rho
}

/// Padding factor `4 (2r/q + 1)` of a cover whose radius equals its target.
pub fn nominal_beta(r: usize, q: usize) -> f64 {
    4.0 * (2.0 * r as f64 / q as f64 + 1.0)
}

/// Covers at arbitrary scales with a fixed padding factor: the cover at
/// scale `D` has clusters of diameter at most `D` and pads every vertex by
/// `D / beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverScheme {
    pub r: usize,
    pub q: usize,
    pub beta: f64,
}

impl CoverScheme {
    pub fn nominal(r: usize, q: usize) -> Self {
        CoverScheme { r, q, beta: nominal_beta(r, q) }
    }

    /// Decomposition radius whose cover pads by exactly `scale / beta`.
    pub fn delta_for(&self, scale: f64) -> f64 {
        2.0 * self.r as f64 * scale / (self.q as f64 * self.beta)
    }

    pub fn cover_at(&self, g: &WeightedGraph, scale: f64) -> Result<PartitionCover, CoverError> {
        let c = build_cover(g, self.r, self.q, self.delta_for(scale))?;
        if !g.le(c.diam, scale) {
            return Err(CoverError::ScaleMiss {
                scale,
                diam: c.diam,
                needed_beta: self.beta * c.diam / scale,
            });
        }
        Ok(c)
    }
}

/// Covers for every scale in `scales(beta)`, all from one scheme.
#[derive(Debug, Clone)]
pub struct FittedScheme {
    pub scheme: CoverScheme,
    pub scales: Vec<f64>,
    pub covers: Vec<PartitionCover>,
    pub attempts: usize,
}

const MAX_FIT_ATTEMPTS: usize = 12;

/// Starts from the nominal padding factor and raises it until the cover at
/// every requested scale meets its diameter budget. The scales may depend on
/// the factor.
pub fn fit_scheme(
    g: &WeightedGraph,
    r: usize,
    q: usize,
    scales: impl Fn(f64) -> Vec<f64>,
) -> Result<FittedScheme, CoverError> {
    let mut scheme = CoverScheme::nominal(r, q);
    for attempt in 1..=MAX_FIT_ATTEMPTS {
        let wanted = scales(scheme.beta);
        let mut memo: BTreeMap<u64, PartitionCover> = BTreeMap::new();
        let mut needed: Option<f64> = None;
        for &scale in &wanted {
            if memo.contains_key(&scale.to_bits()) {
                continue;
            }
            match scheme.cover_at(g, scale) {
                Ok(c) => {
                    memo.insert(scale.to_bits(), c);
                }
                Err(CoverError::ScaleMiss { needed_beta, .. }) => {
                    needed = Some(needed.map_or(needed_beta, |b: f64| b.max(needed_beta)));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        match needed {
            None => {
                let covers = wanted.iter().map(|s| memo[&s.to_bits()].clone()).collect();
                return Ok(FittedScheme { scheme, scales: wanted, covers, attempts: attempt });
            }
            Some(b) => scheme.beta = (b * 1.1).max(scheme.beta * 1.5),
        }
    }
    Err(CoverError::NoFit { attempts: MAX_FIT_ATTEMPTS, beta: scheme.beta })
}

/// Pads a cover to `tau` partitions by repeating its last partition.
pub fn pad_partitions(c: &PartitionCover, tau: usize) -> Vec<Vec<Vec<usize>>> {
    let mut parts = c.partitions.clone();
    while parts.len() < tau {
        parts.push(parts.last().expect("covers have a partition").clone());
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcd::{directed_ball, SupernodeDag};
    use crate::generators::{generate, Family, FamilySpec, WeightMode};

    fn grid(k: usize) -> WeightedGraph {
        generate(&FamilySpec { family: Family::Grid, size: k, weights: WeightMode::Unit, seed: 0 })
            .unwrap()
            .graph
    }

    fn tree(n: usize, seed: u64) -> WeightedGraph {
        generate(&FamilySpec { family: Family::Tree, size: n, weights: WeightMode::Unit, seed })
            .unwrap()
            .graph
    }

    #[test]
    fn presets() {
        assert_eq!(preset_q(Preset::A, 3, 0.5).unwrap(), 1);
        assert_eq!(preset_q(Preset::B, 3, 0.5).unwrap(), 48);
        assert!(preset_q(Preset::B, 3, 0.7).is_err());
        assert_eq!(nominal_beta(3, 1), 28.0);
    }

    #[test]
    fn formula_instance() {
        // r = 3, radius 12, gamma 4, q = 1
        let (radius, gamma, q, w) = (12.0, 4.0, 1.0, 2);
        assert_eq!(4.0 * (2.0 * radius / (q * gamma) + 1.0), 28.0);
        assert_eq!(2.0 * (2.0 * radius + q * gamma), 56.0);
        let s = binomial(3, 2) as f64 * net_color_bound(w, 1, gamma, radius);
        assert!((s - 56.0).abs() < 1e-9);
    }

    #[test]
    fn coloring_small_cases() {
        let one = SupernodeDag::from_arcs(1, &[]).unwrap();
        assert_eq!(color_supernodes(&one, 1, 1).unwrap(), vec![vec![0]]);
        let two = SupernodeDag::from_arcs(2, &[(1, 0)]).unwrap();
        assert_eq!(color_supernodes(&two, 1, 1).unwrap(), vec![vec![0], vec![1]]);
        let apart = SupernodeDag::from_arcs(3, &[(1, 0), (2, 0)]).unwrap();
        assert_eq!(color_supernodes(&apart, 1, 1).unwrap(), vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn coloring_on_grid_respects_bound_and_separation() {
        let g = grid(8);
        let d = build_bcd(&g, 8.0, 8.0 / 5.0, 4).unwrap();
        let dag = build_dag(&g, &d).unwrap();
        for q in 1..=3 {
            let classes = color_supernodes(&dag, 4, q).unwrap();
            assert!(classes.len() as u128 <= binomial((4 + 2 * q - 1) as u64, 4));
            for class in &classes {
                for &a in class {
                    let ball = directed_ball(&dag, a, 2 * q - 1);
                    assert!(class.iter().all(|&b| b == a || !ball.contains(&b)));
                }
            }
        }
    }

    #[test]
    fn enlarge_edge_cases() {
        let g = grid(4);
        let d = build_bcd(&g, 2.0, 0.0, 4).unwrap();
        for eta in 0..d.supernodes.len() {
            assert_eq!(enlarge(&g, &d, eta, 3), d.supernodes[eta].vertices);
        }
        let d = build_bcd(&g, 2.0, 0.5, 4).unwrap();
        let mut expect = set_ball(&g, &d.supernodes[0].vertices, 1.0, None);
        expect.sort_unstable();
        assert_eq!(enlarge(&g, &d, 0, 2), expect);
    }

    #[test]
    fn enlarged_net_partitions_cover_padded_vertices() {
        let g = grid(8);
        let (delta, r, q) = (4.0, 5, 2);
        let d = build_bcd(&g, delta, delta / r as f64, r - 1).unwrap();
        let radius = d.measured.radius.max(d.target.gamma);
        let half = q as f64 * d.target.gamma / 2.0;
        for eta in 0..d.supernodes.len() {
            let hat = enlarge(&g, &d, eta, q);
            let parts = partition_enlarged(&g, &d, eta, &hat, q, radius).unwrap();
            let mask = mask_of(g.n(), &hat);
            let (to_skel, _) = dijkstra(&g, &d.supernodes[eta].skeleton_vertices(), Some(&mask));
            for &v in &hat {
                if !g.le(to_skel[v], radius + half) {
                    continue;
                }
                let (dv, _) = dijkstra(&g, &[v], Some(&mask));
                let ball: Vec<usize> = hat.iter().copied().filter(|&u| g.le(dv[u], half)).collect();
                let ok = parts
                    .iter()
                    .any(|p| p.iter().any(|c| ball.iter().all(|u| c.contains(u))));
                assert!(ok, "vertex {v} of supernode {eta} not padded");
            }
        }
    }

    #[test]
    fn tree_cover_verifies() {
        let g = tree(50, 3);
        let c = build_cover(&g, 3, 1, 8.0).unwrap();
        let rep = verify_cover(&g, &c);
        assert!(rep.passes(), "{:?}", rep.failures);
        let p = c.provenance.as_ref().unwrap();
        assert!(c.s as f64 <= p.s_bound);
        assert!(g.le(p.q as f64 * p.gamma / 2.0, rep.padding_radius));
    }

    #[test]
    fn grid_covers_both_presets() {
        let g = grid(6);
        for q in [1, preset_q(Preset::B, 5, 0.5).unwrap()] {
            let c = build_cover(&g, 5, q, 4.0).unwrap();
            let rep = verify_cover(&g, &c);
            assert!(rep.passes(), "q={q}: {:?}", rep.failures);
        }
    }

    #[test]
    fn beta_does_not_grow_with_q() {
        let g = grid(6);
        let d = build_bcd(&g, 4.0, 0.8, 4).unwrap();
        let mut last = f64::INFINITY;
        for q in [1, 2, 4, 8] {
            let c = build_cover_from(&g, &d, 5, q).unwrap();
            assert!(c.beta <= last);
            last = c.beta;
        }
    }

    #[test]
    fn trivial_cover_is_padded_at_full_diameter() {
        let g = grid(3);
        let c = PartitionCover::trivial(9, 4.0);
        let rep = verify_cover(&g, &c);
        assert!(rep.passes());
        assert_eq!(rep.padding_radius, 4.0);
        assert!(rep.rho_star.is_infinite());
    }

    #[test]
    fn shrunken_cluster_names_vertex() {
        let g = grid(3);
        let c = PartitionCover {
            beta: 2.0,
            s: 1,
            diam: 4.0,
            partitions: vec![vec![vec![0], (1..9).collect()]],
            provenance: None,
        };
        let rep = verify_cover(&g, &c);
        assert!(!rep.padding_ok);
        assert!(rep.unpadded.contains(&0));
        assert_eq!(rep.rho_star, 1.0);
    }

    #[test]
    fn inflated_diameter_is_reported() {
        let g = grid(3);
        let c = PartitionCover {
            beta: 1.0,
            s: 1,
            diam: 3.0,
            partitions: vec![vec![(0..9).collect()]],
            provenance: None,
        };
        let rep = verify_cover(&g, &c);
        assert!(!rep.diameter_ok);
        assert_eq!(rep.max_strong_diameter, 4.0);
    }

    #[test]
    fn scheme_covers_meet_scale() {
        let g = grid(5);
        let fit = fit_scheme(&g, 5, 1, |beta| vec![beta, 2.0 * beta]).unwrap();
        for (c, &scale) in fit.covers.iter().zip(&fit.scales) {
            assert!(c.diam <= scale * (1.0 + 1e-9));
            let rep = verify_cover(&g, c);
            assert!(rep.passes(), "{:?}", rep.failures);
            assert!(g.le(scale / fit.scheme.beta, rep.padding_radius));
        }
    }

    #[test]
    fn cover_json_round_trip() {
        let g = grid(4);
        let c = build_cover(&g, 5, 1, 3.0).unwrap();
        let back: PartitionCover = serde_json::from_str(&c.to_json_string()).unwrap();
        assert_eq!(back, c);
    }
}

//! The acceptance matrix: twelve end-to-end checks over generated instances,
//! each backed by exact distances or exhaustive enumeration.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bcd::{ball_bound, build_bcd, build_dag, check_extended_buffer_all, directed_ball, verify_bcd, BufferedCopDecomposition, SupernodeDag};
use crate::cover::{build_cover_from, nominal_beta, preset_q, rho_star, verify_cover_with, PartitionCover, Preset};
use crate::embed::{
    boundary_distances, distortion_report, embed_full, embed_hierarchy, embed_minor_free_3eps, remove_aspect, DistortionReport, PairSelection,
};
use crate::generators::{generate, Family, FamilySpec, WeightMode};
use crate::graph::{all_pairs, WeightedGraph};
use crate::laminar::verify_ladders;
use crate::partition::{color_cover, to_sparse_partition_with, verify_coloring, verify_sparse_partition};
use crate::prefix_code::build_code;
use crate::util::{binomial, ceil_log2, ceil_log2_ratio};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {:<28} {:>7.2}s (budget {:>4}s)  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

pub struct Instance {
    pub label: String,
    pub graph: WeightedGraph,
    pub r: usize,
}

fn make(family: Family, size: usize, weights: WeightMode, seed: u64) -> Instance {
    let gen = generate(&FamilySpec { family, size, weights, seed }).expect("generator parameters are valid");
    Instance { label: format!("{family}-{size}"), graph: gen.graph, r: gen.r }
}

/// Unit-weight grids, trees, series-parallel graphs and triangulations.
pub fn base_instances() -> Vec<Instance> {
    let mut out = Vec::new();
    for k in [5, 8, 12] {
        out.push(make(Family::Grid, k, WeightMode::Unit, 1));
    }
    for n in [60, 200] {
        out.push(make(Family::Tree, n, WeightMode::Unit, 1));
    }
    for n in [50, 150] {
        out.push(make(Family::SeriesParallel, n, WeightMode::Unit, 1));
    }
    for n in [50, 150] {
        out.push(make(Family::PlanarTriangulation, n, WeightMode::Unit, 1));
    }
    out
}

pub const DELTAS: [f64; 3] = [4.0, 8.0, 16.0];
pub const COVER_EPSILON: f64 = 0.5;

/// Decompositions and covers shared by several criteria.
pub struct SuiteData {
    pub instances: Vec<Instance>,
    pub apsp: Vec<Vec<Vec<f64>>>,
    /// `(instance, delta, decomposition)`
    pub decompositions: Vec<(usize, f64, BufferedCopDecomposition)>,
    /// `(instance, preset, cover)`
    pub covers: Vec<(usize, Preset, PartitionCover)>,
}

impl SuiteData {
    pub fn new() -> Self {
        let instances = base_instances();
        let apsp = instances.iter().map(|i| all_pairs(&i.graph)).collect();
        SuiteData { instances, apsp, decompositions: Vec::new(), covers: Vec::new() }
    }
}

impl Default for SuiteData {
    fn default() -> Self {
        Self::new()
    }
}

fn timed(id: u8, name: &str, budget: f64, f: impl FnOnce() -> (bool, String)) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = f();
    CriterionResult {
        id,
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
        budget_seconds: budget,
    }
}

pub fn bcd_validity(data: &mut SuiteData) -> CriterionResult {
    timed(1, "decomposition validity", 60.0, || {
        let mut failures = Vec::new();
        let mut count = 0;
        for (idx, inst) in data.instances.iter().enumerate() {
            for &delta in &DELTAS {
                let gamma = delta / inst.r as f64;
                match build_bcd(&inst.graph, delta, gamma, inst.r - 1) {
                    Ok(d) => {
                        let rep = verify_bcd(&inst.graph, &d);
                        if !rep.passes() {
                            failures.push(format!("{} delta={delta}: {:?}", inst.label, rep.failures.first()));
                        }
                        count += 1;
                        data.decompositions.push((idx, delta, d));
                    }
                    Err(e) => failures.push(format!("{} delta={delta}: {e}", inst.label)),
                }
            }
        }
        let ok = failures.is_empty();
        let detail = if ok {
            format!("{count} decompositions verified")
        } else {
            format!("{} failures; first: {}", failures.len(), failures[0])
        };
        (ok, detail)
    })
}

/// Counts every transitive DAG on up to `max_nodes` nodes with out-degree at
/// most 2 (arcs point to lower ids), checking directed balls up to radius
/// `max_q` against the bound for the DAG's own maximum out-degree. Returns
/// (DAGs checked, violations).
pub fn enumerate_transitive_dags(max_nodes: usize, max_q: usize) -> (u64, u64) {
    struct State {
        outs: Vec<Vec<usize>>,
        // balls[v][q] as bitmasks
        balls: Vec<Vec<u16>>,
        checked: u64,
        violations: u64,
        max_nodes: usize,
        max_q: usize,
    }
    fn check(st: &mut State) {
        st.checked += 1;
        let w = st.outs.iter().map(Vec::len).max().unwrap_or(0);
        for ball in &st.balls {
            for (q, &b) in ball.iter().enumerate() {
                if b.count_ones() as u128 > binomial((w + q) as u64, w as u64) {
                    st.violations += 1;
                }
            }
        }
    }
    fn extend(st: &mut State) {
        check(st);
        let i = st.outs.len();
        if i == st.max_nodes {
            return;
        }
        let mut choices: Vec<Vec<usize>> = vec![vec![]];
        for a in 0..i {
            choices.push(vec![a]);
            for b in a + 1..i {
                if st.outs[b].contains(&a) {
                    choices.push(vec![a, b]);
                }
            }
        }
        for out in choices {
            let mut ball = vec![0u16; st.max_q + 1];
            ball[0] = 1 << i;
            for q in 1..=st.max_q {
                ball[q] = 1 << i;
                for &c in &out {
                    ball[q] |= st.balls[c][q - 1];
                }
            }
            st.outs.push(out);
            st.balls.push(ball);
            extend(st);
            st.outs.pop();
            st.balls.pop();
        }
    }
    let mut st = State { outs: Vec::new(), balls: Vec::new(), checked: 0, violations: 0, max_nodes, max_q };
    extend(&mut st);
    // the empty DAG is not a DAG on at least one node
    (st.checked - 1, st.violations)
}

pub fn ball_bound_check(data: &mut SuiteData) -> CriterionResult {
    timed(2, "directed-ball bound", 30.0, || {
        let (dags, violations) = enumerate_transitive_dags(8, 6);
        let mut built_violations = 0;
        let mut built = 0;
        for (idx, _, d) in &data.decompositions {
            let inst = &data.instances[*idx];
            let dag = match build_dag(&inst.graph, d) {
                Ok(dag) => dag,
                Err(_) => {
                    built_violations += 1;
                    continue;
                }
            };
            built += 1;
            built_violations += built_dag_violations(&dag, inst.r - 1, 6);
        }
        let ok = violations == 0 && built_violations == 0 && built > 0;
        (
            ok,
            format!(
                "{dags} enumerated DAGs, {violations} violations; {built} built DAGs, {built_violations} violations"
            ),
        )
    })
}

fn built_dag_violations(dag: &SupernodeDag, w: usize, max_q: usize) -> usize {
    let mut bad = 0;
    for v in 0..dag.len() {
        for q in 0..=max_q {
            if directed_ball(dag, v, q).len() as u128 > ball_bound(w, q) {
                bad += 1;
            }
        }
    }
    bad
}

pub fn extended_buffer(data: &mut SuiteData) -> CriterionResult {
    timed(3, "extended buffer", 60.0, || {
        let mut checks = 0;
        let mut violations = 0;
        let mut first = None;
        for (idx, delta, d) in &data.decompositions {
            let inst = &data.instances[*idx];
            let Ok(dag) = build_dag(&inst.graph, d) else {
                violations += 1;
                continue;
            };
            for rep in check_extended_buffer_all(&inst.graph, d, &dag, 3) {
                checks += rep.checked_ancestors;
                if !rep.passes() {
                    violations += rep.violations.len();
                    first.get_or_insert(format!("{} delta={delta}: {:?}", inst.label, rep.violations[0]));
                }
            }
        }
        let ok = violations == 0;
        let mut detail = format!("{checks} (supernode, ancestor, q) checks, {violations} violations");
        if let Some(f) = first {
            detail.push_str(&format!("; first: {f}"));
        }
        (ok, detail)
    })
}

pub fn cover_certificate(data: &mut SuiteData) -> CriterionResult {
    timed(4, "cover certificate", 180.0, || {
        let mut failures = Vec::new();
        let mut count = 0;
        let mut max_s = 0;
        let decomps: Vec<(usize, f64, BufferedCopDecomposition)> = data.decompositions.clone();
        for (idx, delta, d) in &decomps {
            let inst = &data.instances[*idx];
            for preset in [Preset::A, Preset::B] {
                let q = preset_q(preset, inst.r, COVER_EPSILON).expect("epsilon in range");
                let c = match build_cover_from(&inst.graph, d, inst.r, q) {
                    Ok(c) => c,
                    Err(e) => {
                        failures.push(format!("{} delta={delta} {preset}: {e}", inst.label));
                        continue;
                    }
                };
                let rep = verify_cover_with(&inst.graph, &data.apsp[*idx], &c);
                let p = c.provenance.as_ref().expect("built covers carry provenance");
                let expected_diam = 2.0 * (2.0 * p.radius_used + q as f64 * p.gamma);
                let half = q as f64 * p.gamma / 2.0;
                let mut why = Vec::new();
                if !rep.passes() {
                    why.push(rep.failures.first().cloned().unwrap_or_default());
                }
                if c.diam > expected_diam * (1.0 + 1e-12) {
                    why.push(format!("diam {} > {expected_diam}", c.diam));
                }
                if !inst.graph.le(half, rep.padding_radius) {
                    why.push(format!("padding {} < q gamma / 2 = {half}", rep.padding_radius));
                }
                if c.s as f64 > p.s_bound {
                    why.push(format!("s = {} > bound {}", c.s, p.s_bound));
                }
                if !why.is_empty() {
                    failures.push(format!("{} delta={delta} {preset}: {}", inst.label, why.join("; ")));
                }
                count += 1;
                max_s = max_s.max(c.s);
                data.covers.push((*idx, preset, c));
            }
        }
        let ok = failures.is_empty() && count > 0;
        let detail = if ok {
            format!("{count} covers verified, largest s = {max_s}")
        } else {
            format!("{} failures; first: {}", failures.len(), failures[0])
        };
        (ok, detail)
    })
}

pub fn prefix_codes() -> CriterionResult {
    timed(5, "prefix codes", 5.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut bad = 0;
        for _ in 0..1000 {
            let m = rng.gen_range(1..=64);
            let weights: Vec<f64> = (0..m).map(|_| rng.gen_range(1..=1000) as f64).collect();
            let code = build_code(&weights).expect("positive weights");
            let total: f64 = weights.iter().sum();
            let prefix_free = (0..m).all(|a| (0..m).all(|b| a == b || !code.words[b].starts_with(&code.words[a])));
            let lengths_ok = (0..m).all(|x| code.words[x].len() <= 2 * ceil_log2_ratio(total, weights[x]) as usize);
            if !(prefix_free && lengths_ok) {
                bad += 1;
            }
        }
        (bad == 0, format!("1000 weight multisets, {bad} failures"))
    })
}

pub struct LadderCase {
    pub label: String,
    pub epsilon: f64,
    pub run: crate::embed::MultiScaleRun,
}

fn ladder_cases() -> Result<Vec<LadderCase>, String> {
    let mut out = Vec::new();
    for k in [4, 7, 10] {
        let inst = make(Family::Grid, k, WeightMode::Unit, 1);
        for eps in [0.25, 0.5] {
            let run = embed_full(&inst.graph, inst.r, eps).map_err(|e| format!("{} eps={eps}: {e}", inst.label))?;
            out.push(LadderCase { label: inst.label.clone(), epsilon: eps, run });
        }
    }
    Ok(out)
}

pub fn laminar_ladders(cases: &mut Option<Vec<LadderCase>>) -> CriterionResult {
    timed(6, "laminar ladders", 120.0, || {
        let built = match ladder_cases() {
            Ok(c) => c,
            Err(e) => return (false, e),
        };
        let mut failures = Vec::new();
        let mut ladders = 0;
        let mut worst_ratio: f64 = 0.0;
        for case in &built {
            for st in &case.run.per_step {
                let rep = verify_ladders(&case.run.normalized, &case.run.apsp, &st.ladders);
                ladders += st.ladders.len();
                worst_ratio = worst_ratio.max(rep.max_diameter_ratio);
                if !rep.passes() {
                    failures.push(format!(
                        "{} eps={} a={}: {}",
                        case.label,
                        case.epsilon,
                        st.a,
                        rep.failures.first().cloned().unwrap_or_default()
                    ));
                }
            }
        }
        *cases = Some(built);
        let ok = failures.is_empty();
        let detail = if ok {
            format!("{ladders} ladders verified, largest diameter/scale = {worst_ratio:.3}")
        } else {
            format!("{} failures; first: {}", failures.len(), failures[0])
        };
        (ok, detail)
    })
}

pub fn hierarchy_embedding(cases: &Option<Vec<LadderCase>>) -> CriterionResult {
    timed(7, "ladder embedding", 120.0, || {
        let Some(cases) = cases else {
            return (false, "ladders unavailable".into());
        };
        let mut failures = Vec::new();
        let mut embedded = 0;
        for case in cases {
            let apsp = &case.run.apsp;
            let n = apsp.len();
            let points: Vec<usize> = (0..n).collect();
            let top = case.run.top;
            for st in &case.run.per_step {
                for lad in &st.ladders {
                    let levels = &lad.levels[..top + 2];
                    let e = match embed_hierarchy(apsp, levels, &points) {
                        Ok(e) => e,
                        Err(err) => {
                            failures.push(format!("{}: {err}", case.label));
                            continue;
                        }
                    };
                    embedded += 1;
                    let want = 2 * ceil_log2(n) as usize + 2 * levels.len();
                    if e.dim != want || e.coords.iter().any(|c| c.len() != want) {
                        failures.push(format!("{}: dimension {} != {want}", case.label, e.dim));
                    }
                    let owners: Vec<Vec<usize>> = levels.iter().map(|p| owner_of(n, p)).collect();
                    let bd: Vec<Vec<f64>> = levels.iter().map(|p| boundary_distances(apsp, p)).collect();
                    for x in 0..n {
                        for y in x + 1..n {
                            let norm = linf(&e.coords[x], &e.coords[y]);
                            if norm > 2.0 * apsp[x][y] * (1.0 + 1e-12) {
                                failures.push(format!("{}: pair ({x},{y}) stretched to {norm}", case.label));
                            }
                            for (lvl, o) in owners.iter().enumerate() {
                                if o[x] != o[y] && norm < (bd[lvl][x] + bd[lvl][y]) * (1.0 - 1e-12) {
                                    failures.push(format!(
                                        "{}: pair ({x},{y}) split at level {} but only {norm} apart",
                                        case.label,
                                        lvl as i64 - 1
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        let ok = failures.is_empty() && embedded > 0;
        let detail = if ok {
            format!("{embedded} ladder embeddings checked on all pairs")
        } else {
            format!("{} failures; first: {}", failures.len(), failures.first().cloned().unwrap_or_default())
        };
        (ok, detail)
    })
}

fn owner_of(n: usize, part: &[Vec<usize>]) -> Vec<usize> {
    let mut o = vec![0; n];
    for (k, cl) in part.iter().enumerate() {
        for &v in cl {
            o[v] = k;
        }
    }
    o
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn full_embedding() -> CriterionResult {
    timed(8, "multi-scale embedding", 180.0, || {
        let eps: f64 = 0.5;
        let mut instances = Vec::new();
        for k in [4, 6, 8] {
            instances.push(make(Family::Grid, k, WeightMode::Unit, 1));
        }
        for n in [30, 100] {
            instances.push(make(Family::Tree, n, WeightMode::Unit, 1));
        }
        let mut weighted = make(Family::Tree, 60, WeightMode::Uniform { lo: 1.0, hi: 10.0 }, 2);
        weighted.label.push_str("-uniform");
        instances.push(weighted);
        let mut failures = Vec::new();
        let mut notes = Vec::new();
        for inst in &instances {
            let run = match embed_full(&inst.graph, inst.r, eps) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("{}: {e}", inst.label));
                    continue;
                }
            };
            let apsp = all_pairs(&inst.graph);
            let rep = distortion_report(&apsp, &run.embedding.coords, PairSelection::All);
            let beta_measured = run.measured_padding();
            let bound = (1.0 + eps) * 2.0 * beta_measured;
            if !(rep.distortion <= bound * (1.0 + 1e-9)) {
                failures.push(format!("{}: distortion {:.3} > {bound:.3}", inst.label, rep.distortion));
            }
            if run.embedding.dim != run.dimension_formula() {
                failures.push(format!(
                    "{}: dimension {} != formula {}",
                    inst.label,
                    run.embedding.dim,
                    run.dimension_formula()
                ));
            }
            notes.push(format!("{} {:.2}/{:.2}", inst.label, rep.distortion, bound));
        }
        let ok = failures.is_empty();
        let detail = if ok {
            format!("distortion/bound: {}", notes.join(", "))
        } else {
            format!("{} failures; first: {}", failures.len(), failures[0])
        };
        (ok, detail)
    })
}

pub fn aspect_removal() -> CriterionResult {
    timed(9, "aspect-ratio removal", 180.0, || {
        let eps: f64 = 0.4;
        let mut instances = Vec::new();
        for n in [40, 60] {
            instances.push(make(Family::Tree, n, WeightMode::ExponentialSpread, 3));
            instances.push(make(Family::SeriesParallel, n, WeightMode::ExponentialSpread, 3));
        }
        let mut failures = Vec::new();
        let mut notes = Vec::new();
        for inst in &instances {
            let claimed = nominal_beta(inst.r, 1) * (1.0 + eps).powi(3);
            let run = match remove_aspect(&inst.graph, |h| Ok(embed_full(h, inst.r, eps)?.embedding), 2.0, claimed, eps) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("{}: {e}", inst.label));
                    continue;
                }
            };
            for sc in &run.scales {
                if !sc.truncation.passes() {
                    failures.push(format!(
                        "{} scale {}: {}",
                        inst.label,
                        sc.index,
                        sc.truncation.failures.first().cloned().unwrap_or_default()
                    ));
                }
            }
            let rep = distortion_report(&all_pairs(&inst.graph), &run.embedding.coords, PairSelection::All);
            let exp_bound = (1.0 + eps) * 2.0;
            let con_bound = (1.0 + eps) * run.inner_contraction;
            if !(rep.expansion <= exp_bound * (1.0 + 1e-9)) {
                failures.push(format!("{}: expansion {:.4} > {exp_bound}", inst.label, rep.expansion));
            }
            if !(rep.contraction <= con_bound * (1.0 + 1e-9)) {
                failures.push(format!("{}: contraction {:.4} > {con_bound:.4}", inst.label, rep.contraction));
            }
            notes.push(format!(
                "{} scales={} exp={:.3} con={:.2}/{:.2}",
                inst.label,
                run.scales.len(),
                rep.expansion,
                rep.contraction,
                con_bound
            ));
        }
        let ok = failures.is_empty();
        let detail = if ok {
            notes.join(", ")
        } else {
            format!("{} failures; first: {}", failures.len(), failures[0])
        };
        (ok, detail)
    })
}

/// Two nested loops, no shared code with [`distortion_report`].
pub fn oracle_distortion(dist: &[Vec<f64>], coords: &[Vec<f64>]) -> (f64, f64) {
    let mut expansion: f64 = 0.0;
    let mut contraction: f64 = 0.0;
    for x in 0..coords.len() {
        for y in 0..coords.len() {
            if x >= y {
                continue;
            }
            let mut norm: f64 = 0.0;
            for k in 0..coords[x].len() {
                let diff = (coords[x][k] - coords[y][k]).abs();
                if diff > norm {
                    norm = diff;
                }
            }
            let d = dist[x][y];
            if d > 0.0 {
                expansion = expansion.max(norm / d);
                contraction = contraction.max(if norm > 0.0 { d / norm } else { f64::INFINITY });
            } else if norm > 0.0 {
                expansion = f64::INFINITY;
            }
        }
    }
    (expansion, contraction)
}

pub fn minor_free_pipeline() -> CriterionResult {
    timed(10, "subdivided 3+eps pipeline", 180.0, || {
        let eps: f64 = 0.5;
        let inst = make(Family::Grid, 6, WeightMode::Unit, 1);
        let run = match embed_minor_free_3eps(&inst.graph, inst.r, eps, Some(2)) {
            Ok(r) => r,
            Err(e) => return (false, format!("{}: {e}", inst.label)),
        };
        let apsp = all_pairs(&inst.graph);
        let rep: DistortionReport = distortion_report(&apsp, &run.embedding.coords, PairSelection::All);
        let (oe, oc) = oracle_distortion(&apsp, &run.embedding.coords);
        let mut failures = Vec::new();
        if rep.expansion > 1.0 + eps {
            failures.push(format!("expansion {} > {}", rep.expansion, 1.0 + eps));
        }
        if rep.expansion.to_bits() != oe.to_bits() || rep.contraction.to_bits() != oc.to_bits() {
            failures.push(format!(
                "report ({}, {}) differs from oracle ({oe}, {oc})",
                rep.expansion, rep.contraction
            ));
        }
        // recompute the gate from the covers directly
        let inner = &run.inner;
        let mut measured: f64 = 0.0;
        for st in &inner.per_step {
            for (c, &scale) in st.covers.iter().zip(&st.scales) {
                measured = measured.max(scale / rho_star(&inner.apsp, &c.partitions));
            }
        }
        let target = nominal_beta(inst.r, preset_q(Preset::B, inst.r, eps).expect("epsilon in range"));
        let gate = measured <= target * (1.0 + 1e-9);
        let expected_bound = if gate {
            (1.0 + eps).powi(2) * (3.0 + 8.0 * eps)
        } else {
            inner.scheme.beta * (1.0 + eps).powi(3)
        };
        let cert = &run.certificate;
        if cert.gate_passed != gate || cert.contraction_bound != expected_bound || cert.measured_padding != measured {
            failures.push(format!("certificate {cert:?} disagrees with recomputed gate {gate} at padding {measured}"));
        }
        if !(rep.contraction <= cert.contraction_bound) {
            failures.push(format!("contraction {} above certified {}", rep.contraction, cert.contraction_bound));
        }
        let detail = format!(
            "n~={} expansion={:.4} contraction={:.3} distortion={:.3} gate={} (padding {:.3} vs {:.3}) bound={:.3}",
            run.subdivided.n(),
            rep.expansion,
            rep.contraction,
            rep.distortion,
            if gate { "passed" } else { "not met" },
            measured,
            target,
            cert.contraction_bound
        );
        if failures.is_empty() {
            (true, detail)
        } else {
            (false, format!("{}; {detail}", failures.join("; ")))
        }
    })
}

fn preset_a_covers(data: &SuiteData) -> impl Iterator<Item = &(usize, Preset, PartitionCover)> {
    data.covers.iter().filter(|(_, p, _)| *p == Preset::A)
}

pub fn colorability(data: &SuiteData) -> CriterionResult {
    timed(11, "colorability", 60.0, || {
        let mut failures = Vec::new();
        let mut count = 0;
        for (idx, _, c) in preset_a_covers(data) {
            let inst = &data.instances[*idx];
            let col = color_cover(c);
            let rep = verify_coloring(&inst.graph, &data.apsp[*idx], c, &col);
            count += 1;
            if !rep.passes() || col.k != c.s {
                failures.push(format!("{}: k={} s={} conflicts={:?}", inst.label, col.k, c.s, rep.conflicts.first()));
            }
        }
        let ok = failures.is_empty() && count > 0;
        let detail = if ok {
            format!("{count} preset-A covers colored with k = s")
        } else {
            format!("{} failures; first: {}", failures.len(), failures.first().cloned().unwrap_or_default())
        };
        (ok, detail)
    })
}

pub fn sparse_partitions(data: &SuiteData) -> CriterionResult {
    timed(12, "sparse partitions", 60.0, || {
        let mut failures = Vec::new();
        let mut flagged = Vec::new();
        let mut count = 0;
        let mut max_tau = 0;
        for (idx, preset, c) in &data.covers {
            let inst = &data.instances[*idx];
            let p = to_sparse_partition_with(&inst.graph, &data.apsp[*idx], c);
            let rep = verify_sparse_partition(&inst.graph, &data.apsp[*idx], &p);
            count += 1;
            max_tau = max_tau.max(p.tau);
            if !rep.passes() {
                failures.push(format!("{} {preset}: {}", inst.label, rep.failures.first().cloned().unwrap_or_default()));
            }
            if p.tau_exceeds_s {
                flagged.push(format!("{} {preset} tau={} s={}", inst.label, p.tau, p.s));
            }
        }
        let ok = failures.is_empty() && count > 0;
        let mut detail = if ok {
            format!("{count} partitions, max tau = {max_tau}, {} flagged tau > s", flagged.len())
        } else {
            format!("{} failures; first: {}", failures.len(), failures[0])
        };
        if let Some(f) = flagged.first() {
            detail.push_str(&format!(" (e.g. {f})"));
        }
        (ok, detail)
    })
}

/// Runs every criterion in order; `on_result` sees each as it finishes.
pub fn run_acceptance(mut on_result: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let mut data = SuiteData::new();
    let mut ladders = None;
    let mut out = Vec::new();
    let mut push = |r: CriterionResult| {
        on_result(&r);
        out.push(r);
    };
    push(bcd_validity(&mut data));
    push(ball_bound_check(&mut data));
    push(extended_buffer(&mut data));
    push(cover_certificate(&mut data));
    push(prefix_codes());
    push(laminar_ladders(&mut ladders));
    push(hierarchy_embedding(&ladders));
    drop(ladders);
    push(full_embedding());
    push(aspect_removal());
    push(minor_free_pipeline());
    push(colorability(&data));
    push(sparse_partitions(&data));
    out
}

//! Buffered cop decompositions: construction, validation, and the supernode
//! DAG with its directed-ball and extended-buffer checks.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{dijkstra, mask_of, WeightedGraph};
use crate::util::binomial;

#[derive(Debug, Error)]
pub enum BcdError {
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error("component rooted at {root} touches {count} ancestor supernodes, more than w = {w}")]
    TooManyAncestors { root: usize, count: usize, w: usize },
    #[error(
        "buffer violated: vertex {vertex} of supernode {descendant} is at distance {distance} \
         from non-adjacent ancestor {ancestor}"
    )]
    BufferViolation { descendant: usize, ancestor: usize, vertex: usize, distance: f64 },
    #[error("arc {from} -> {to} does not point to an ancestor")]
    NotAncestor { from: usize, to: usize },
    #[error("supernode {node} has out-arcs to {a} and {b}, which are not joined")]
    NotTransitive { node: usize, a: usize, b: usize },
    #[error("arc list contains a cycle through node {0}")]
    Cyclic(usize),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed decomposition json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Supernode {
    pub id: usize,
    pub vertices: Vec<usize>,
    pub skeleton_root: usize,
    /// `(vertex, parent)` edges of the skeleton tree.
    pub skeleton_parent: Vec<(usize, usize)>,
    /// Parent in the partition tree.
    pub parent: Option<usize>,
    pub domain: Vec<usize>,
    pub adjacent_ancestors: Vec<usize>,
}

impl Supernode {
    pub fn skeleton_vertices(&self) -> Vec<usize> {
        let mut s: Vec<usize> = std::iter::once(self.skeleton_root)
            .chain(self.skeleton_parent.iter().map(|e| e.0))
            .collect();
        s.sort_unstable();
        s
    }

    /// Skeleton vertices with no skeleton children, root excluded.
    pub fn skeleton_leaves(&self) -> usize {
        let parents: BTreeSet<usize> = self.skeleton_parent.iter().map(|e| e.1).collect();
        self.skeleton_parent.iter().filter(|e| !parents.contains(&e.0)).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcdParams {
    pub delta: f64,
    pub gamma: f64,
    pub w: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredParams {
    /// Largest distance from a supernode vertex to its skeleton inside the supernode.
    pub radius: f64,
    pub gamma: f64,
    /// Largest adjacent-ancestor set or skeleton leaf count.
    pub w: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferedCopDecomposition {
    pub supernodes: Vec<Supernode>,
    pub target: BcdParams,
    pub measured: MeasuredParams,
}

impl BufferedCopDecomposition {
    /// Supernode id of every vertex.
    pub fn owner(&self, n: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; n];
        for s in &self.supernodes {
            for &v in &s.vertices {
                owner[v] = s.id;
            }
        }
        owner
    }

    /// Proper ancestors of `id`, nearest first.
    pub fn ancestors(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.supernodes[id].parent;
        while let Some(p) = cur {
            out.push(p);
            cur = self.supernodes[p].parent;
        }
        out
    }

    pub fn is_ancestor(&self, anc: usize, desc: usize) -> bool {
        let mut cur = self.supernodes[desc].parent;
        while let Some(p) = cur {
            if p == anc {
                return true;
            }
            cur = self.supernodes[p].parent;
        }
        false
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("decomposition serializes")
    }

    pub fn load(path: &Path) -> Result<Self, BcdError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| BcdError::Io { path: path.display().to_string(), source })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Builds a decomposition with buffer `gamma` and at most `w` adjacent
/// ancestors per supernode.
///
/// Components are processed first-in first-out starting from `V`. Each new
/// supernode is its skeleton (shortest paths from the lowest-id vertex to one
/// contact per adjacent ancestor), grown by the `delta`-ball around the
/// skeleton and by every vertex of the component within `gamma` of the parent
/// supernode inside the parent's domain, then reconnected along shortest
/// paths. Absorbing that collar up front leaves no buffer violation for a
/// later repair pass to fix; a violation that still shows up is reported as
/// [`BcdError::BufferViolation`].
pub fn build_bcd(
    g: &WeightedGraph,
    delta: f64,
    gamma: f64,
    w: usize,
) -> Result<BufferedCopDecomposition, BcdError> {
    if !(delta > 0.0) || !(gamma >= 0.0) || gamma > delta || w == 0 {
        return Err(BcdError::BadParameters(format!(
            "need delta > 0, 0 <= gamma <= delta, w >= 1 (got {delta}, {gamma}, {w})"
        )));
    }
    let n = g.n();
    let mut owner = vec![usize::MAX; n];
    let mut supernodes: Vec<Supernode> = Vec::new();
    let mut queue: VecDeque<(Vec<usize>, Option<usize>)> = VecDeque::new();
    queue.push_back(((0..n).collect(), None));
    // distances from the most recent parent inside its domain; siblings are
    // queued together so one slot suffices
    let mut collar: Option<(usize, Vec<f64>)> = None;

    while let Some((comp, parent)) = queue.pop_front() {
        let mask = mask_of(n, &comp);
        let mut touching: BTreeSet<usize> = BTreeSet::new();
        for &v in &comp {
            for &(u, _) in g.neighbors(v) {
                if !mask[u] {
                    touching.insert(owner[u]);
                }
            }
        }
        let root = comp[0];
        if touching.len() > w {
            return Err(BcdError::TooManyAncestors { root, count: touching.len(), w });
        }
        let (dist, pred) = dijkstra(g, &[root], Some(&mask));

        let mut in_skeleton = vec![false; n];
        in_skeleton[root] = true;
        let mut skeleton = vec![root];
        let mut skeleton_parent = Vec::new();
        for &anc in &touching {
            let contact = comp
                .iter()
                .copied()
                .filter(|&v| g.neighbors(v).iter().any(|&(u, _)| !mask[u] && owner[u] == anc))
                .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
                .expect("touching ancestor has a contact");
            let mut cur = contact;
            while !in_skeleton[cur] {
                in_skeleton[cur] = true;
                skeleton.push(cur);
                skeleton_parent.push((cur, pred[cur]));
                cur = pred[cur];
            }
        }
        skeleton_parent.sort_unstable();

        let (to_skeleton, _) = dijkstra(g, &skeleton, Some(&mask));
        let mut member = vec![false; n];
        for &v in &comp {
            member[v] = g.le(to_skeleton[v], delta);
        }
        if let Some(p) = parent {
            if collar.as_ref().map(|c| c.0) != Some(p) {
                let dom_mask = mask_of(n, &supernodes[p].domain);
                let field = dijkstra(g, &supernodes[p].vertices, Some(&dom_mask)).0;
                collar = Some((p, field));
            }
            let field = &collar.as_ref().expect("collar computed").1;
            for &v in &comp {
                if g.le(field[v], gamma) {
                    member[v] = true;
                }
            }
        }
        connect_to_root(g, &mask, &mut member, root);

        let id = supernodes.len();
        let vertices: Vec<usize> = comp.iter().copied().filter(|&v| member[v]).collect();
        for &v in &vertices {
            owner[v] = id;
        }
        supernodes.push(Supernode {
            id,
            vertices,
            skeleton_root: root,
            skeleton_parent,
            parent,
            domain: comp.clone(),
            adjacent_ancestors: touching.into_iter().collect(),
        });
        let rest: Vec<bool> = (0..n).map(|v| mask[v] && !member[v]).collect();
        for c in g.components(Some(&rest)) {
            queue.push_back((c, Some(id)));
        }
    }

    let mut d = BufferedCopDecomposition {
        supernodes,
        target: BcdParams { delta, gamma, w },
        measured: MeasuredParams { radius: 0.0, gamma, w: 0 },
    };
    d.measured.radius = measured_radius(g, &d);
    d.measured.w = d
        .supernodes
        .iter()
        .map(|s| s.adjacent_ancestors.len().max(s.skeleton_leaves()))
        .max()
        .unwrap_or(0);
    if let Some(v) = buffer_violations(g, &d, true).into_iter().next() {
        return Err(BcdError::BufferViolation {
            descendant: v.descendant,
            ancestor: v.ancestor,
            vertex: v.vertex,
            distance: v.distance,
        });
    }
    Ok(d)
}

/// Adds shortest connecting paths (inside `mask`) until the members form one
/// connected piece containing `root`.
fn connect_to_root(g: &WeightedGraph, mask: &[bool], member: &mut [bool], root: usize) {
    loop {
        let pieces = g.components(Some(member));
        if pieces.len() <= 1 {
            return;
        }
        let main = pieces.iter().find(|c| c.contains(&root)).expect("root is a member");
        let (dist, pred) = dijkstra(g, main, Some(mask));
        let target = pieces
            .iter()
            .filter(|c| !c.contains(&root))
            .flatten()
            .copied()
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
            .expect("another piece exists");
        let in_main = mask_of(g.n(), main);
        let mut cur = target;
        while !in_main[cur] {
            member[cur] = true;
            cur = pred[cur];
        }
    }
}

fn measured_radius(g: &WeightedGraph, d: &BufferedCopDecomposition) -> f64 {
    d.supernodes
        .iter()
        .map(|s| {
            let mask = mask_of(g.n(), &s.vertices);
            let (dist, _) = dijkstra(g, &s.skeleton_vertices(), Some(&mask));
            s.vertices.iter().map(|&v| dist[v]).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Distances from each supernode to every vertex inside its own domain.
pub fn domain_distance_fields(g: &WeightedGraph, d: &BufferedCopDecomposition) -> Vec<Vec<f64>> {
    d.supernodes
        .iter()
        .map(|s| {
            let mask = mask_of(g.n(), &s.domain);
            dijkstra(g, &s.vertices, Some(&mask)).0
        })
        .collect()
}

/// Pairs of supernodes joined by at least one edge of `g`.
pub fn supernode_adjacency(g: &WeightedGraph, d: &BufferedCopDecomposition) -> BTreeSet<(usize, usize)> {
    let owner = d.owner(g.n());
    g.edges()
        .iter()
        .filter_map(|&(u, v, _)| {
            let (a, b) = (owner[u], owner[v]);
            (a != b).then(|| (a.min(b), a.max(b)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferFailure {
    pub descendant: usize,
    pub ancestor: usize,
    pub vertex: usize,
    pub distance: f64,
}

/// Every (descendant, non-adjacent ancestor) pair with a domain vertex of the
/// descendant within `gamma` of the ancestor. One witness per pair.
fn buffer_violations(
    g: &WeightedGraph,
    d: &BufferedCopDecomposition,
    stop_at_first: bool,
) -> Vec<BufferFailure> {
    let owner = d.owner(g.n());
    let adjacent = supernode_adjacency(g, d);
    let gamma = d.target.gamma;
    let mut out = Vec::new();
    let mut reported: BTreeSet<(usize, usize)> = BTreeSet::new();
    for anc in &d.supernodes {
        if anc.domain.len() == anc.vertices.len() {
            continue;
        }
        let mask = mask_of(g.n(), &anc.domain);
        let (dist, _) = dijkstra(g, &anc.vertices, Some(&mask));
        for &v in &anc.domain {
            if owner[v] == anc.id || !g.le(dist[v], gamma) {
                continue;
            }
            // v lies in the domain of every supernode on its chain below anc
            let mut cur = Some(owner[v]);
            while let Some(s) = cur {
                if s == anc.id {
                    break;
                }
                let key = (anc.id.min(s), anc.id.max(s));
                if !adjacent.contains(&key) && reported.insert((s, anc.id)) {
                    out.push(BufferFailure {
                        descendant: s,
                        ancestor: anc.id,
                        vertex: v,
                        distance: dist[v],
                    });
                    if stop_at_first {
                        return out;
                    }
                }
                cur = d.supernodes[s].parent;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BcdReport {
    pub partition_ok: bool,
    pub tree_ok: bool,
    pub ancestors_ok: bool,
    pub skeleton_ok: bool,
    pub radius_ok: bool,
    pub buffer_ok: bool,
    pub measured_radius: f64,
    pub within_target_radius: bool,
    pub max_adjacent_ancestors: usize,
    pub max_skeleton_leaves: usize,
    pub supernodes: usize,
    pub buffer_failures: Vec<BufferFailure>,
    pub failures: Vec<String>,
}

impl BcdReport {
    pub fn passes(&self) -> bool {
        self.partition_ok
            && self.tree_ok
            && self.ancestors_ok
            && self.skeleton_ok
            && self.radius_ok
            && self.buffer_ok
    }
}

/// Checks a decomposition against the definition with exact distances.
pub fn verify_bcd(g: &WeightedGraph, d: &BufferedCopDecomposition) -> BcdReport {
    let n = g.n();
    let w = d.target.w;
    let mut rep = BcdReport {
        partition_ok: true,
        tree_ok: true,
        ancestors_ok: true,
        skeleton_ok: true,
        radius_ok: true,
        buffer_ok: true,
        measured_radius: 0.0,
        within_target_radius: true,
        max_adjacent_ancestors: 0,
        max_skeleton_leaves: 0,
        supernodes: d.supernodes.len(),
        buffer_failures: Vec::new(),
        failures: Vec::new(),
    };

    // partition of V
    let mut owner = vec![usize::MAX; n];
    for (i, s) in d.supernodes.iter().enumerate() {
        if s.id != i || s.vertices.is_empty() {
            rep.partition_ok = false;
            rep.failures.push(format!("supernode at position {i} has id {} or is empty", s.id));
        }
        for &v in &s.vertices {
            if v >= n || owner[v] != usize::MAX {
                rep.partition_ok = false;
                rep.failures.push(format!("vertex {v} out of range or in two supernodes"));
            } else {
                owner[v] = i;
            }
        }
    }
    if let Some(v) = owner.iter().position(|&o| o == usize::MAX) {
        rep.partition_ok = false;
        rep.failures.push(format!("vertex {v} is in no supernode"));
    }
    if !rep.partition_ok {
        rep.tree_ok = false;
        rep.ancestors_ok = false;
        rep.skeleton_ok = false;
        rep.radius_ok = false;
        rep.buffer_ok = false;
        return rep;
    }

    // partition tree: parents earlier, domains are subtree unions, edges
    // only between ancestor and descendant
    let k = d.supernodes.len();
    let roots = d.supernodes.iter().filter(|s| s.parent.is_none()).count();
    if roots != 1 {
        rep.tree_ok = false;
        rep.failures.push(format!("partition tree has {roots} roots"));
    }
    for s in &d.supernodes {
        if let Some(p) = s.parent {
            if p >= s.id {
                rep.tree_ok = false;
                rep.failures.push(format!("supernode {} has parent {p} created later", s.id));
            }
        }
    }
    if !rep.tree_ok {
        rep.ancestors_ok = false;
        rep.skeleton_ok = false;
        rep.radius_ok = false;
        rep.buffer_ok = false;
        return rep;
    }
    let mut domains: Vec<Vec<usize>> = d.supernodes.iter().map(|s| s.vertices.clone()).collect();
    for id in (0..k).rev() {
        if let Some(p) = d.supernodes[id].parent {
            let child = domains[id].clone();
            domains[p].extend(child);
        }
    }
    for (id, dom) in domains.iter_mut().enumerate() {
        dom.sort_unstable();
        if *dom != d.supernodes[id].domain {
            rep.tree_ok = false;
            rep.failures.push(format!("domain of supernode {id} is not the union of its subtree"));
        }
    }
    for &(u, v, _) in g.edges() {
        let (a, b) = (owner[u], owner[v]);
        if a != b && !d.is_ancestor(a, b) && !d.is_ancestor(b, a) {
            rep.tree_ok = false;
            rep.failures.push(format!("edge {u}-{v} joins unrelated supernodes {a} and {b}"));
        }
    }

    // adjacent ancestors
    for s in &d.supernodes {
        let dom_mask = mask_of(n, &domains[s.id]);
        let mut expected: BTreeSet<usize> = BTreeSet::new();
        for &v in &domains[s.id] {
            for &(u, _) in g.neighbors(v) {
                if !dom_mask[u] {
                    expected.insert(owner[u]);
                }
            }
        }
        let expected: Vec<usize> = expected.into_iter().collect();
        if expected != s.adjacent_ancestors {
            rep.ancestors_ok = false;
            rep.failures.push(format!(
                "supernode {}: adjacent ancestors {:?} but stored {:?}",
                s.id, expected, s.adjacent_ancestors
            ));
        }
        rep.max_adjacent_ancestors = rep.max_adjacent_ancestors.max(expected.len());
        if expected.len() > w {
            rep.ancestors_ok = false;
            rep.failures.push(format!(
                "supernode {} has {} adjacent ancestors > w = {w}",
                s.id,
                expected.len()
            ));
        }
    }

    // skeletons
    for s in &d.supernodes {
        let ok = check_skeleton(g, s, &owner, &domains[s.id], w, &mut rep.failures);
        rep.max_skeleton_leaves = rep.max_skeleton_leaves.max(s.skeleton_leaves());
        rep.skeleton_ok &= ok;
    }

    // radius
    let mut radius: f64 = 0.0;
    for s in &d.supernodes {
        if !s.vertices.contains(&s.skeleton_root) {
            continue;
        }
        let mask = mask_of(n, &s.vertices);
        let skel: Vec<usize> = s.skeleton_vertices().into_iter().filter(|&v| mask[v]).collect();
        let (dist, _) = dijkstra(g, &skel, Some(&mask));
        for &v in &s.vertices {
            radius = radius.max(dist[v]);
        }
    }
    rep.measured_radius = radius;
    if !radius.is_finite() {
        rep.radius_ok = false;
        rep.failures.push("some supernode vertex cannot reach its skeleton".into());
    } else if !g.le(radius, d.measured.radius) {
        rep.radius_ok = false;
        rep.failures.push(format!(
            "radius {radius} exceeds the recorded measured radius {}",
            d.measured.radius
        ));
    }
    rep.within_target_radius = g.le(radius, d.target.delta);

    // buffer
    if rep.tree_ok {
        rep.buffer_failures = buffer_violations(g, d, false);
        rep.buffer_ok = rep.buffer_failures.is_empty();
        for f in &rep.buffer_failures {
            rep.failures.push(format!(
                "buffer: vertex {} (supernode {}) at distance {} from non-adjacent ancestor {}",
                f.vertex, f.descendant, f.distance, f.ancestor
            ));
        }
    } else {
        rep.buffer_ok = false;
    }
    rep
}

fn check_skeleton(
    g: &WeightedGraph,
    s: &Supernode,
    owner: &[usize],
    domain: &[usize],
    w: usize,
    failures: &mut Vec<String>,
) -> bool {
    let n = g.n();
    let mut ok = true;
    let mut fail = |msg: String| {
        failures.push(format!("skeleton of supernode {}: {msg}", s.id));
        false
    };
    let verts = s.skeleton_vertices();
    if verts.iter().any(|&v| v >= n || owner[v] != s.id) {
        return fail("contains vertices outside the supernode".into());
    }
    let parent: BTreeMap<usize, usize> = s.skeleton_parent.iter().copied().collect();
    if parent.len() != s.skeleton_parent.len() || parent.contains_key(&s.skeleton_root) {
        return fail("parent map is not a function on non-root vertices".into());
    }
    let dom_mask = mask_of(n, domain);
    let (dist, _) = dijkstra(g, &[s.skeleton_root], Some(&dom_mask));
    for &v in parent.keys() {
        // walk to the root, summing edge weights
        let mut length = 0.0;
        let mut cur = v;
        let mut steps = 0;
        while cur != s.skeleton_root {
            let Some(&p) = parent.get(&cur) else {
                return fail(format!("vertex {cur} has no parent"));
            };
            let Some(&(_, wt)) = g.neighbors(cur).iter().find(|e| e.0 == p) else {
                return fail(format!("{cur}-{p} is not an edge"));
            };
            length += wt;
            cur = p;
            steps += 1;
            if steps > n {
                return fail("parent map has a cycle".into());
            }
        }
        if !(g.le(length, dist[v]) && g.le(dist[v], length)) {
            ok = fail(format!(
                "path to {v} has length {length}, domain distance is {}",
                dist[v]
            ));
        }
    }
    let leaves = s.skeleton_leaves();
    if leaves > w {
        ok = fail(format!("{leaves} leaves > w = {w}"));
    }
    for &anc in &s.adjacent_ancestors {
        let touches = verts
            .iter()
            .any(|&v| g.neighbors(v).iter().any(|&(u, _)| owner[u] == anc));
        if !touches {
            ok = fail(format!("no edge to adjacent ancestor {anc}"));
        }
    }
    ok
}

/// Directed graph on supernodes; every arc points from a supernode to an
/// ancestor it shares an edge with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupernodeDag {
    pub out: Vec<Vec<usize>>,
}

impl SupernodeDag {
    /// Validates acyclicity and the transitive rule for an arbitrary arc list.
    pub fn from_arcs(nodes: usize, arcs: &[(usize, usize)]) -> Result<Self, BcdError> {
        let mut out = vec![Vec::new(); nodes];
        for &(a, b) in arcs {
            out[a].push(b);
        }
        for o in &mut out {
            o.sort_unstable();
            o.dedup();
        }
        let dag = SupernodeDag { out };
        if let Some(v) = dag.find_cycle() {
            return Err(BcdError::Cyclic(v));
        }
        dag.check_transitive()?;
        Ok(dag)
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn arcs(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_arc(&self, a: usize, b: usize) -> bool {
        self.out[a].binary_search(&b).is_ok()
    }

    fn find_cycle(&self) -> Option<usize> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.len()];
        for start in 0..self.len() {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state[start] = 1;
            while let Some(&mut (v, ref mut i)) = stack.last_mut() {
                if *i < self.out[v].len() {
                    let u = self.out[v][*i];
                    *i += 1;
                    match state[u] {
                        0 => {
                            state[u] = 1;
                            stack.push((u, 0));
                        }
                        1 => return Some(u),
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    fn check_transitive(&self) -> Result<(), BcdError> {
        for (x, outs) in self.out.iter().enumerate() {
            for (i, &y) in outs.iter().enumerate() {
                for &z in &outs[i + 1..] {
                    if !self.has_arc(y, z) && !self.has_arc(z, y) {
                        return Err(BcdError::NotTransitive { node: x, a: y, b: z });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Supernode DAG of a decomposition.
pub fn build_dag(g: &WeightedGraph, d: &BufferedCopDecomposition) -> Result<SupernodeDag, BcdError> {
    let mut arcs = Vec::new();
    for (a, b) in supernode_adjacency(g, d) {
        // a < b; ancestors are created first
        if !d.is_ancestor(a, b) {
            return Err(BcdError::NotAncestor { from: b, to: a });
        }
        arcs.push((b, a));
    }
    SupernodeDag::from_arcs(d.supernodes.len(), &arcs)
}

/// Nodes reachable from `eta` along at most `q` arcs, `eta` included, sorted.
pub fn directed_ball(dag: &SupernodeDag, eta: usize, q: usize) -> Vec<usize> {
    let mut depth = vec![usize::MAX; dag.len()];
    depth[eta] = 0;
    let mut frontier = vec![eta];
    let mut out = vec![eta];
    for level in 1..=q {
        let mut next = Vec::new();
        for &v in &frontier {
            for &u in &dag.out[v] {
                if depth[u] == usize::MAX {
                    depth[u] = level;
                    next.push(u);
                    out.push(u);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    out.sort_unstable();
    out
}

/// Upper bound on the directed ball size for out-degree `w` and radius `q`.
pub fn ball_bound(w: usize, q: usize) -> u128 {
    binomial((w + q) as u64, w as u64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtendedBufferReport {
    pub eta: usize,
    pub q: usize,
    pub threshold: f64,
    /// Smallest distance found over the checked ancestors (`inf` if none).
    pub min_distance: f64,
    pub checked_ancestors: usize,
    pub violations: Vec<BufferFailure>,
}

impl ExtendedBufferReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For every ancestor outside the directed ball of radius `2q + 1`, all
/// vertices of `eta` must be farther than `(q + 1) * gamma` inside the
/// ancestor's domain.
pub fn check_extended_buffer(
    g: &WeightedGraph,
    d: &BufferedCopDecomposition,
    dag: &SupernodeDag,
    eta: usize,
    q: usize,
) -> ExtendedBufferReport {
    let fields: BTreeMap<usize, Vec<f64>> = d
        .ancestors(eta)
        .into_iter()
        .map(|a| {
            let s = &d.supernodes[a];
            let mask = mask_of(g.n(), &s.domain);
            (a, dijkstra(g, &s.vertices, Some(&mask)).0)
        })
        .collect();
    extended_buffer_with(g, d, dag, eta, q, |a| &fields[&a])
}

/// Same check as [`check_extended_buffer`] for every supernode and every
/// `q <= max_q`, sharing distance fields.
pub fn check_extended_buffer_all(
    g: &WeightedGraph,
    d: &BufferedCopDecomposition,
    dag: &SupernodeDag,
    max_q: usize,
) -> Vec<ExtendedBufferReport> {
    let fields = domain_distance_fields(g, d);
    let mut out = Vec::new();
    for eta in 0..d.supernodes.len() {
        for q in 0..=max_q {
            out.push(extended_buffer_with(g, d, dag, eta, q, |a| &fields[a]));
        }
    }
    out
}

fn extended_buffer_with<'a>(
    g: &WeightedGraph,
    d: &BufferedCopDecomposition,
    dag: &SupernodeDag,
    eta: usize,
    q: usize,
    field: impl Fn(usize) -> &'a Vec<f64>,
) -> ExtendedBufferReport {
    let threshold = (q as f64 + 1.0) * d.target.gamma;
    let near: BTreeSet<usize> = directed_ball(dag, eta, 2 * q + 1).into_iter().collect();
    let mut rep = ExtendedBufferReport {
        eta,
        q,
        threshold,
        min_distance: f64::INFINITY,
        checked_ancestors: 0,
        violations: Vec::new(),
    };
    for anc in d.ancestors(eta) {
        if near.contains(&anc) {
            continue;
        }
        rep.checked_ancestors += 1;
        let f = field(anc);
        let (vertex, dist) = d.supernodes[eta]
            .vertices
            .iter()
            .map(|&v| (v, f[v]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("supernodes are non-empty");
        rep.min_distance = rep.min_distance.min(dist);
        if g.le(dist, threshold) {
            rep.violations.push(BufferFailure { descendant: eta, ancestor: anc, vertex, distance: dist });
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> WeightedGraph {
        WeightedGraph::new(n, (0..n - 1).map(|i| (i, i + 1, 1.0)).collect()).unwrap()
    }

    fn grid(k: usize) -> WeightedGraph {
        let mut edges = Vec::new();
        for r in 0..k {
            for c in 0..k {
                let v = r * k + c;
                if c + 1 < k {
                    edges.push((v, v + 1, 1.0));
                }
                if r + 1 < k {
                    edges.push((v, v + k, 1.0));
                }
            }
        }
        WeightedGraph::new(k * k, edges).unwrap()
    }

    #[test]
    fn star_is_one_supernode() {
        let g = WeightedGraph::new(6, (1..6).map(|i| (0, i, 1.0 + i as f64 / 10.0)).collect()).unwrap();
        let d = build_bcd(&g, 2.0, 0.5, 2).unwrap();
        assert_eq!(d.supernodes.len(), 1);
        assert_eq!(d.supernodes[0].vertices, (0..6).collect::<Vec<_>>());
        let dag = build_dag(&g, &d).unwrap();
        assert_eq!(dag.arcs(), 0);
        assert!(verify_bcd(&g, &d).passes());
    }

    #[test]
    fn unit_path() {
        let g = path(10);
        let d = build_bcd(&g, 2.0, 1.0, 2).unwrap();
        let rep = verify_bcd(&g, &d);
        assert!(rep.passes(), "{:?}", rep.failures);
        assert!(rep.measured_radius <= 2.0);
    }

    #[test]
    fn grid_8x8() {
        let g = grid(8);
        let d = build_bcd(&g, 8.0, 8.0 / 5.0, 4).unwrap();
        let rep = verify_bcd(&g, &d);
        assert!(rep.passes(), "{:?}", rep.failures);
        assert!(rep.max_adjacent_ancestors <= 4);
        let dag = build_dag(&g, &d).unwrap();
        assert!(dag.max_out_degree() <= 4);
    }

    #[test]
    fn single_supernode_passes_vacuously() {
        let g = grid(3);
        let d = BufferedCopDecomposition {
            supernodes: vec![Supernode {
                id: 0,
                vertices: (0..9).collect(),
                skeleton_root: 0,
                skeleton_parent: vec![],
                parent: None,
                domain: (0..9).collect(),
                adjacent_ancestors: vec![],
            }],
            target: BcdParams { delta: 4.0, gamma: 1.0, w: 1 },
            measured: MeasuredParams { radius: 4.0, gamma: 1.0, w: 0 },
        };
        let rep = verify_bcd(&g, &d);
        assert!(rep.passes(), "{:?}", rep.failures);
        assert_eq!(rep.measured_radius, 4.0);
    }

    /// Path 0-1-2-3-4 cut as {0}, {1}, {2,3,4} in a chain: supernode 2 is
    /// not adjacent to supernode 0 but vertex 2 sits at distance 2 from it.
    fn chain_decomposition(gamma: f64) -> BufferedCopDecomposition {
        let sn = |id: usize, vertices: Vec<usize>, parent: Option<usize>, domain: Vec<usize>, anc: Vec<usize>| Supernode {
            id,
            skeleton_root: vertices[0],
            vertices,
            skeleton_parent: vec![],
            parent,
            domain,
            adjacent_ancestors: anc,
        };
        BufferedCopDecomposition {
            supernodes: vec![
                sn(0, vec![0], None, vec![0, 1, 2, 3, 4], vec![]),
                sn(1, vec![1], Some(0), vec![1, 2, 3, 4], vec![0]),
                sn(2, vec![2, 3, 4], Some(1), vec![2, 3, 4], vec![1]),
            ],
            target: BcdParams { delta: 4.0, gamma, w: 2 },
            measured: MeasuredParams { radius: 2.0, gamma, w: 1 },
        }
    }

    #[test]
    fn hand_built_buffer_violation_is_named() {
        let g = path(5);
        let ok = verify_bcd(&g, &chain_decomposition(1.5));
        assert!(ok.passes(), "{:?}", ok.failures);
        let bad = verify_bcd(&g, &chain_decomposition(2.0));
        assert!(!bad.buffer_ok);
        assert_eq!(
            bad.buffer_failures,
            vec![BufferFailure { descendant: 2, ancestor: 0, vertex: 2, distance: 2.0 }]
        );
    }

    #[test]
    fn dag_basics() {
        let g = path(5);
        let d = chain_decomposition(1.5);
        let dag = build_dag(&g, &d).unwrap();
        assert_eq!(dag.out, vec![vec![], vec![0], vec![1]]);
        assert_eq!(directed_ball(&dag, 2, 0), vec![2]);
        assert_eq!(directed_ball(&dag, 2, 1), vec![1, 2]);
        assert_eq!(directed_ball(&dag, 2, 5), vec![0, 1, 2]);
    }

    #[test]
    fn transitive_rule_is_enforced() {
        assert!(matches!(
            SupernodeDag::from_arcs(3, &[(2, 1), (2, 0)]),
            Err(BcdError::NotTransitive { node: 2, .. })
        ));
        assert!(SupernodeDag::from_arcs(3, &[(2, 1), (2, 0), (1, 0)]).is_ok());
        assert!(matches!(SupernodeDag::from_arcs(2, &[(0, 1), (1, 0)]), Err(BcdError::Cyclic(_))));
    }

    #[test]
    fn extended_buffer_on_path_and_grid() {
        let g = path(10);
        let d = build_bcd(&g, 2.0, 1.0, 2).unwrap();
        let dag = build_dag(&g, &d).unwrap();
        for rep in check_extended_buffer_all(&g, &d, &dag, 3) {
            assert!(rep.passes(), "{rep:?}");
        }
        let g = grid(8);
        let d = build_bcd(&g, 8.0, 1.6, 4).unwrap();
        let dag = build_dag(&g, &d).unwrap();
        for eta in 0..d.supernodes.len() {
            for q in 0..=2 {
                assert!(check_extended_buffer(&g, &d, &dag, eta, q).passes());
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = path(3);
        assert!(build_bcd(&g, 0.0, 0.0, 1).is_err());
        assert!(build_bcd(&g, 1.0, 2.0, 1).is_err());
        assert!(build_bcd(&g, 1.0, 0.5, 0).is_err());
    }

    #[test]
    fn too_many_ancestors_is_structured() {
        // K5 needs more than w = 1 adjacent ancestors once split finely
        let mut edges = Vec::new();
        for a in 0..5 {
            for b in a + 1..5 {
                edges.push((a, b, 1.0));
            }
        }
        let g = WeightedGraph::new(5, edges).unwrap();
        assert!(matches!(build_bcd(&g, 0.5, 0.1, 1), Err(BcdError::TooManyAncestors { .. })));
    }
}

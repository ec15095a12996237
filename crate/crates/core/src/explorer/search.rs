//! Bounded search for the largest order of a faithful action at a given
//! genus, over graphs of groups with few vertices and edges.
//!
//! Every graph in normal form satisfies `sum_e n/|G_e| - sum_v n/|G_v| = g-1`
//! with every vertex contributing a nonnegative amount, which bounds vertex
//! indices by `3(g-1)` and edge indices by `6(g-1)`. Candidates are therefore
//! enumerated as index patterns on graph shapes and then realized.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certify::{certify_bounds, theorem_bound, BoundCertificate, ProofCase};
use crate::admissibility::{admissibility_report, point_stabilizer_subgroups};
use crate::covering::max_finite_normal_subgroup;
use crate::error::{Error, Result};
use crate::gog::{genus_from_order, Edge, EdgeId, GraphOfGroups, Vertex, VertexId};
use crate::groups::{
    conjugate_set, make_cyclic, make_cyclic_rotation, subgroup_lattice, FiniteGroup, GroupHom, GroupSpec,
    PolyhedralKind,
};
use crate::homsearch::{verify_surjection, Surjection};
use crate::io::{spec_name, InstanceDocument, ReportRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchClass {
    Cyclic,
    Any,
}

impl std::fmt::Display for SearchClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SearchClass::Cyclic => "cyclic",
            SearchClass::Any => "any",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCaps {
    pub max_vertices: usize,
    pub max_edges: usize,
    /// Largest order scanned; the theorem bound when absent.
    #[serde(default)]
    pub max_order: Option<u64>,
    #[serde(default = "one")]
    pub min_order: u64,
    /// Leaves tried per index pattern before giving up on it.
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

fn one() -> u64 {
    1
}

fn default_attempts() -> usize {
    20_000
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps { max_vertices: 4, max_edges: 5, max_order: None, min_order: 1, max_attempts: default_attempts() }
    }
}

/// Underlying multigraph: edges `(u, v)` with `u <= v`, loops allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shape {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Shape {
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + 1 - self.vertices
    }

    fn relabel(&self, perm: &[usize]) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u].min(perm[v]), perm[u].max(perm[v])))
            .collect();
        e.sort_unstable();
        e
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &(u, v) in &self.edges {
                for (a, b) in [(u, v), (v, u)] {
                    if a == x && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Breadth-first spanning tree from vertex 0 scanning edges in order,
    /// as [`GraphOfGroups::spanning_tree`] does: vertex order and tree flags.
    fn tree(&self) -> (Vec<usize>, Vec<Option<usize>>, Vec<bool>) {
        let mut order = vec![0];
        let mut parent = vec![None; self.vertices];
        let mut tree = vec![false; self.edges.len()];
        let mut seen = vec![false; self.vertices];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for (k, &(u, v)) in self.edges.iter().enumerate() {
                let other = if u == x {
                    v
                } else if v == x {
                    u
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    parent[other] = Some(k);
                    tree[k] = true;
                    order.push(other);
                }
            }
        }
        (order, parent, tree)
    }
}

/// Connected multigraphs with loops up to isomorphism, at least one edge.
pub fn enumerate_shapes(max_vertices: usize, max_edges: usize) -> Vec<Shape> {
    let mut out = Vec::new();
    for nv in 1..=max_vertices {
        let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|u| (u..nv).map(move |v| (u, v))).collect();
        let perms: Vec<Vec<usize>> = (0..nv).permutations(nv).collect();
        let mut seen = HashSet::new();
        for ne in 1..=max_edges {
            for edges in pairs.iter().copied().combinations_with_replacement(ne) {
                let shape = Shape { vertices: nv, edges };
                if !shape.is_connected() {
                    continue;
                }
                let canon = perms.iter().map(|p| shape.relabel(p)).min().unwrap();
                if seen.insert(canon.clone()) {
                    out.push(Shape { vertices: nv, edges: canon });
                }
            }
        }
    }
    out
}

/// Vertex indices `q_v = n/|G_v|` and edge indices `r_e = n/|G_e|`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Pattern {
    q: Vec<u64>,
    r: Vec<u64>,
}

fn divisors(n: u64) -> Vec<u64> {
    let mut d: Vec<u64> = (1..).take_while(|k| k * k <= n).filter(|k| n.is_multiple_of(*k)).flat_map(|k| [k, n / k]).collect();
    d.sort_unstable();
    d.dedup();
    d
}

/// Index patterns of normal-form graphs of groups on `shape` with
/// `sum r - sum q = g - 1`, indices taken from `divs`.
fn index_patterns(shape: &Shape, divs: &[u64], g: u64) -> Vec<Pattern> {
    let gm1 = g - 1;
    let qs: Vec<u64> = divs.iter().copied().filter(|&d| d <= 3 * gm1).collect();
    let rs: Vec<u64> = divs.iter().copied().filter(|&d| d <= 6 * gm1).collect();
    let mut out = Vec::new();
    let mut q = vec![0u64; shape.vertices];
    fn assign_q(i: usize, q: &mut Vec<u64>, qs: &[u64], rs: &[u64], shape: &Shape, gm1: u64, out: &mut Vec<Pattern>) {
        if i == q.len() {
            let options: Vec<Vec<u64>> = shape
                .edges
                .iter()
                .map(|&(u, v)| {
                    rs.iter()
                        .copied()
                        .filter(|&r| r % q[u] == 0 && r % q[v] == 0 && (u == v || (r >= 2 * q[u] && r >= 2 * q[v])))
                        .collect()
                })
                .collect();
            if options.iter().any(|o| o.is_empty()) {
                return;
            }
            let target = gm1 + q.iter().sum::<u64>();
            let mins: Vec<u64> = options.iter().map(|o| o[0]).collect();
            let mut suffix = vec![0u64; mins.len() + 1];
            for k in (0..mins.len()).rev() {
                suffix[k] = suffix[k + 1] + mins[k];
            }
            let mut r = vec![0u64; options.len()];
            fn assign_r(k: usize, sum: u64, r: &mut Vec<u64>, options: &[Vec<u64>], suffix: &[u64], target: u64, q: &[u64], out: &mut Vec<Pattern>) {
                if k == r.len() {
                    if sum == target {
                        out.push(Pattern { q: q.to_vec(), r: r.clone() });
                    }
                    return;
                }
                for &x in &options[k] {
                    if sum + x + suffix[k + 1] > target {
                        break;
                    }
                    r[k] = x;
                    assign_r(k + 1, sum + x, r, options, suffix, target, q, out);
                }
            }
            assign_r(0, 0, &mut r, &options, &suffix, target, q, out);
            return;
        }
        for &x in qs {
            q[i] = x;
            assign_q(i + 1, q, qs, rs, shape, gm1, out);
        }
    }
    if gm1 == 0 {
        return out;
    }
    assign_q(0, &mut q, &qs, &rs, shape, gm1, &mut out);
    out
}

/// Condensed description of a verified instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub order: u64,
    pub genus: u64,
    pub target: String,
    pub shape: Shape,
    pub vertex_orders: Vec<u64>,
    pub edge_orders: Vec<u64>,
    pub case: ProofCase,
    /// Every inequality of the certificate holds.
    pub certified: bool,
    pub digest: String,
}

impl InstanceSummary {
    pub fn single_edge(&self) -> bool {
        self.shape.edges.len() == 1
    }
}

impl SearchReport {
    /// Report line for the best instance, if any.
    pub fn row(&self) -> Option<ReportRow> {
        let order = self.best_order?;
        let digest = self.witness_digest.clone().unwrap_or_default();
        Some(ReportRow::new(self.genus, self.class.to_string(), order, self.bound, true, digest))
    }

    /// Instances whose order exceeds the bound of their class.
    pub fn violations(&self) -> Vec<&InstanceSummary> {
        self.instances.iter().filter(|s| s.order > self.bound).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub genus: u64,
    pub class: SearchClass,
    pub caps: SearchCaps,
    pub bound: u64,
    /// The genus satisfies the hypothesis of the bound for this class.
    pub in_theorem_range: bool,
    pub max_order_scanned: u64,
    pub best_order: Option<u64>,
    pub witness: Option<InstanceDocument>,
    pub witness_digest: Option<String>,
    pub certificate: Option<BoundCertificate>,
    pub instances: Vec<InstanceSummary>,
    pub units_scanned: usize,
    /// Always false: no a priori bound on the size of an extremal graph.
    pub complete: bool,
    pub diagnostics: Vec<String>,
}

/// Resumable progress of a search.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SearchState {
    genus: u64,
    class: SearchClass,
    caps: SearchCaps,
    scanned: Vec<String>,
    instances: Vec<InstanceSummary>,
    best: Option<(u64, InstanceDocument)>,
    diagnostics: Vec<String>,
}

#[derive(Debug, Clone)]
enum Unit {
    Cyclic(u64),
    Target(GroupSpec, u64),
}

impl Unit {
    fn key(&self) -> String {
        match self {
            Unit::Cyclic(n) => format!("cyclic:{n}"),
            Unit::Target(spec, _) => spec_name(spec),
        }
    }

    fn order(&self) -> u64 {
        match self {
            Unit::Cyclic(n) | Unit::Target(_, n) => *n,
        }
    }
}

#[derive(Default)]
struct UnitResult {
    instances: Vec<(InstanceSummary, InstanceDocument)>,
    diagnostics: Vec<String>,
}

/// Non-cyclic central products of binary dihedral and binary polyhedral
/// groups with order in `[min, max]`, largest first.
pub fn any_class_catalogue(min: u64, max: u64) -> Vec<GroupSpec> {
    let mut blocks: Vec<(GroupSpec, u64)> = (2..)
        .map(|k| (GroupSpec::BinaryDihedral { n: k as u32 }, 4 * k))
        .take_while(|&(_, o)| o * 8 / 2 <= max)
        .collect();
    for (kind, o) in [
        (PolyhedralKind::BinaryTetrahedral, 24),
        (PolyhedralKind::BinaryOctahedral, 48),
        (PolyhedralKind::BinaryIcosahedral, 120),
    ] {
        blocks.push((GroupSpec::Polyhedral { kind }, o));
    }
    let mut out = Vec::new();
    for i in 0..blocks.len() {
        for j in i..blocks.len() {
            let order = blocks[i].1 * blocks[j].1 / 2;
            if order >= min && order <= max {
                let spec = GroupSpec::CentralProduct { left: Box::new(blocks[i].0.clone()), right: Box::new(blocks[j].0.clone()) };
                out.push((order, spec));
            }
        }
    }
    out.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| spec_name(&a.1).cmp(&spec_name(&b.1))));
    out.into_iter().map(|(_, s)| s).collect()
}

fn compact(doc: &InstanceDocument) -> String {
    serde_json::to_string(doc).expect("document serializes")
}

/// Larger order first, then the smaller canonical serialization.
fn better(a: &(u64, String), b: &(u64, String)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

pub fn search_max_order(genus: u64, class: SearchClass, caps: &SearchCaps, checkpoint: Option<&Path>) -> Result<SearchReport> {
    if genus < 2 {
        return Err(Error::Search(format!("genus must be at least 2, got {genus}")));
    }
    let cyclic = class == SearchClass::Cyclic;
    let bound = theorem_bound(genus, cyclic);
    let in_theorem_range = if cyclic { genus > 2 } else { genus >= 5 };
    let max_order = caps.max_order.unwrap_or(bound);
    let shapes = enumerate_shapes(caps.max_vertices, caps.max_edges);

    let mut state = match checkpoint {
        Some(p) if p.exists() => {
            let s: SearchState = serde_json::from_str(&std::fs::read_to_string(p)?)?;
            if s.genus != genus || s.class != class || s.caps != *caps {
                return Err(Error::Search(format!("checkpoint {} belongs to a different search", p.display())));
            }
            s
        }
        _ => SearchState {
            genus,
            class,
            caps: caps.clone(),
            scanned: Vec::new(),
            instances: Vec::new(),
            best: None,
            diagnostics: Vec::new(),
        },
    };
    if shapes.is_empty() {
        state.diagnostics.push("caps admit no graph with an edge".into());
    }

    let mut units: Vec<Unit> = (caps.min_order.max(1)..=max_order).rev().map(Unit::Cyclic).collect();
    if !cyclic {
        for spec in any_class_catalogue(caps.min_order, max_order) {
            let n = spec.build()?.order() as u64;
            units.push(Unit::Target(spec, n));
        }
        units.sort_by(|a, b| b.order().cmp(&a.order()).then_with(|| a.key().cmp(&b.key())));
    }
    let done: HashSet<String> = state.scanned.iter().cloned().collect();
    let pending: Vec<Unit> = units.into_iter().filter(|u| !done.contains(&u.key())).collect();

    let state = Mutex::new(state);
    let path: Option<PathBuf> = checkpoint.map(Path::to_path_buf);
    let run = |unit: &Unit| -> Result<()> {
        let result = if shapes.is_empty() {
            UnitResult::default()
        } else {
            match unit {
                Unit::Cyclic(n) => cyclic_unit(*n, genus, &shapes),
                Unit::Target(spec, _) => any_unit(spec, genus, &shapes, caps.max_attempts),
            }
        };
        let mut s = state.lock().unwrap();
        s.scanned.push(unit.key());
        s.diagnostics.extend(result.diagnostics);
        for (summary, doc) in result.instances {
            let candidate = (summary.order, compact(&doc));
            let replace = match &s.best {
                None => true,
                Some((order, b)) => better(&candidate, &(*order, compact(b))),
            };
            if replace {
                s.best = Some((summary.order, doc));
            }
            s.instances.push(summary);
        }
        if let Some(p) = &path {
            write_state(p, &s)?;
        }
        Ok(())
    };
    pending.par_iter().with_max_len(1).try_for_each(run)?;
    let mut state = state.into_inner().unwrap();

    state.instances.sort_by(|a, b| b.order.cmp(&a.order).then_with(|| a.digest.cmp(&b.digest)));
    state.diagnostics.sort();
    state.diagnostics.dedup();
    let (witness, witness_digest, certificate) = match &state.best {
        Some((_, doc)) => {
            let inst = doc.build()?;
            let cert = inst.surjection.as_ref().map(|s| certify_bounds(&inst.graph, s));
            (Some(doc.clone()), Some(doc.digest()), cert)
        }
        None => (None, None, None),
    };
    let mut diagnostics = state.diagnostics;
    if witness.is_none() {
        diagnostics.push("no faithful admissible instance within the caps".into());
    }
    Ok(SearchReport {
        genus,
        class,
        caps: caps.clone(),
        bound,
        in_theorem_range,
        max_order_scanned: max_order,
        best_order: state.instances.first().map(|s| s.order),
        witness,
        witness_digest,
        certificate,
        instances: state.instances,
        units_scanned: state.scanned.len(),
        complete: false,
        diagnostics,
    })
}

fn write_state(path: &Path, s: &SearchState) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_string(s)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs every check on a candidate and summarizes it if it passes.
fn verify_candidate(
    graph: &GraphOfGroups,
    s: &Surjection,
    genus: u64,
    shape: &Shape,
    target: &str,
) -> std::result::Result<(InstanceSummary, InstanceDocument), String> {
    let n = s.target().order() as u64;
    if !verify_surjection(s) {
        return Err("surjection check failed".into());
    }
    match genus_from_order(graph, n) {
        Ok(g) if g == genus => {}
        other => return Err(format!("genus mismatch: {other:?}")),
    }
    if !graph.is_normal_form() {
        return Err("not in normal form".into());
    }
    let adm = admissibility_report(graph, &BTreeMap::new()).map_err(|e| e.to_string())?;
    if !adm.admissible {
        return Err("not admissible".into());
    }
    if !max_finite_normal_subgroup(graph).is_trivial() {
        return Err("not faithful".into());
    }
    let cert = certify_bounds(graph, s);
    let doc = InstanceDocument::from_parts(graph, &BTreeMap::new(), Some(s), &[format!("search witness, genus {genus}")]);
    let summary = InstanceSummary {
        order: n,
        genus,
        target: target.into(),
        shape: shape.clone(),
        vertex_orders: graph.vertices().iter().map(|v| v.group.order() as u64).collect(),
        edge_orders: graph.edges().iter().map(|e| e.group.order() as u64).collect(),
        case: cert.case,
        certified: cert.applicable && cert.all_hold(),
        digest: doc.digest(),
    };
    Ok((summary, doc))
}

/// Key of a weighted labelled multigraph up to relabelling.
fn canonical_key(shape: &Shape, p: &Pattern) -> (Vec<u64>, Vec<(usize, usize, u64)>) {
    (0..shape.vertices)
        .permutations(shape.vertices)
        .map(|perm| {
            let mut q = vec![0; shape.vertices];
            for v in 0..shape.vertices {
                q[perm[v]] = p.q[v];
            }
            let mut e: Vec<(usize, usize, u64)> = shape
                .edges
                .iter()
                .zip(&p.r)
                .map(|(&(u, v), &r)| (perm[u].min(perm[v]), perm[u].max(perm[v]), r))
                .collect();
            e.sort_unstable();
            (q, e)
        })
        .min()
        .unwrap()
}

/// Arithmetic filters for cyclic targets: edge orders with gcd 1 (no finite
/// normal subgroup), vertex orders generating `Z_n` unless there is a cycle,
/// and at most two coprime circle stabilizers at each vertex.
fn cyclic_filters(shape: &Shape, n: u64, p: &Pattern) -> Option<Vec<(u32, u32)>> {
    let e: Vec<u64> = p.r.iter().map(|r| n / r).collect();
    let m: Vec<u64> = p.q.iter().map(|q| n / q).collect();
    if e.iter().fold(0, |acc, x| acc.gcd(x)) != 1 {
        return None;
    }
    if shape.cycle_rank() == 0 && m.iter().fold(1, |acc, x| acc.lcm(x)) != n {
        return None;
    }
    let mut rotations = Vec::new();
    for v in 0..shape.vertices {
        let mut orders: Vec<u64> = shape
            .edges
            .iter()
            .zip(&e)
            .filter(|((a, b), &x)| (*a == v || *b == v) && x > 1)
            .map(|(_, &x)| x)
            .collect();
        orders.sort_unstable();
        orders.dedup();
        match orders[..] {
            [] => rotations.push((1, 1)),
            [a] => rotations.push((a as u32, 1)),
            [a, b] if a.gcd(&b) == 1 => rotations.push((a as u32, b as u32)),
            _ => return None,
        }
    }
    Some(rotations)
}

fn cyclic_unit(n: u64, genus: u64, shapes: &[Shape]) -> UnitResult {
    let mut result = UnitResult::default();
    let divs = divisors(n);
    let mut seen = HashSet::new();
    let mut cache: HashMap<u64, Arc<FiniteGroup>> = HashMap::new();
    for shape in shapes {
        for p in index_patterns(shape, &divs, genus) {
            let Some(rotations) = cyclic_filters(shape, n, &p) else { continue };
            if !seen.insert(canonical_key(shape, &p)) {
                continue;
            }
            let built = build_cyclic(shape, n, &p, &rotations, &mut cache);
            match built.map_err(|e| e.to_string()).and_then(|(g, s)| verify_candidate(&g, &s, genus, shape, &format!("Z{n}"))) {
                Ok(found) => result.instances.push(found),
                Err(why) => result.diagnostics.push(format!("cyclic model disagrees with verification at n = {n}: {why}")),
            }
        }
    }
    result
}

fn cyclic_group(cache: &mut HashMap<u64, Arc<FiniteGroup>>, n: u64) -> Result<Arc<FiniteGroup>> {
    if let Some(g) = cache.get(&n) {
        return Ok(g.clone());
    }
    let g = Arc::new(make_cyclic(n as u32)?);
    cache.insert(n, g.clone());
    Ok(g)
}

fn build_cyclic(
    shape: &Shape,
    n: u64,
    p: &Pattern,
    rotations: &[(u32, u32)],
    cache: &mut HashMap<u64, Arc<FiniteGroup>>,
) -> Result<(GraphOfGroups, Surjection)> {
    let mut groups = Vec::new();
    for v in 0..shape.vertices {
        let (s, t) = rotations[v];
        groups.push(Arc::new(make_cyclic_rotation((n / p.q[v]) as u32, s, t)?));
    }
    let gen = |m: u64, k: u64| if m > 1 { vec![k as usize] } else { vec![] };
    let mut edges = Vec::new();
    for (k, (&(u, v), &r)) in shape.edges.iter().zip(&p.r).enumerate() {
        let e = n / r;
        let group = cyclic_group(cache, e)?;
        edges.push(Edge {
            id: EdgeId(k as u32),
            group: group.clone(),
            ends: (VertexId(u as u32), VertexId(v as u32)),
            alpha: GroupHom::new(group.clone(), groups[u].clone(), gen(e, (n / p.q[u]) / e))?,
            omega: GroupHom::new(group.clone(), groups[v].clone(), gen(e, (n / p.q[v]) / e))?,
        });
    }
    let vertices =
        groups.iter().enumerate().map(|(v, g)| Vertex { id: VertexId(v as u32), group: g.clone() }).collect();
    let graph = GraphOfGroups::new(vertices, edges)?;
    let target = cyclic_group(cache, n)?;
    let images = (0..shape.vertices).map(|v| (VertexId(v as u32), gen(n / p.q[v], p.q[v]))).collect();
    let tree = graph.spanning_tree();
    let stable = graph
        .edges()
        .iter()
        .filter(|e| !tree.tree_edges.contains(&e.id))
        .map(|e| (e.id, 1 % n as usize))
        .collect();
    let s = Surjection::new(&graph, target, &images, &stable)?;
    Ok((graph, s))
}

/// Subgroup data of a non-cyclic target.
struct TargetData {
    group: Arc<FiniteGroup>,
    subgroups: Vec<(FixedBitSet, Vec<usize>)>,
    by_index: HashMap<u64, Vec<usize>>,
    stabilizers: Vec<FixedBitSet>,
    menus: HashMap<usize, (Vec<FixedBitSet>, HashSet<FixedBitSet>)>,
}

impl TargetData {
    fn menu(&mut self, v: usize) -> &(Vec<FixedBitSet>, HashSet<FixedBitSet>) {
        if !self.menus.contains_key(&v) {
            let set = &self.subgroups[v].0;
            let mut trivial = FixedBitSet::with_capacity(self.group.order());
            trivial.insert(0);
            let mut list = vec![trivial];
            for k in &self.stabilizers {
                let mut x = set.clone();
                x.intersect_with(k);
                if !list.contains(&x) {
                    list.push(x);
                }
            }
            let lookup = list.iter().cloned().collect();
            self.menus.insert(v, (list, lookup));
        }
        &self.menus[&v]
    }

    /// Representatives of the conjugacy classes among `candidates`.
    fn class_representatives(&self, candidates: &[usize]) -> Vec<usize> {
        let index: HashMap<&FixedBitSet, usize> = candidates.iter().map(|&i| (&self.subgroups[i].0, i)).collect();
        let mut seen = HashSet::new();
        let mut reps = Vec::new();
        for &i in candidates {
            if seen.contains(&i) {
                continue;
            }
            reps.push(i);
            let mut stack = vec![i];
            seen.insert(i);
            while let Some(x) = stack.pop() {
                for &g in self.group.generators() {
                    let c = conjugate_set(&self.group, g, &self.subgroups[x].0);
                    if let Some(&j) = index.get(&c) {
                        if seen.insert(j) {
                            stack.push(j);
                        }
                    }
                }
            }
        }
        reps
    }

    /// Right coset representatives of `W` in `G`.
    fn coset_reps(&self, w: usize) -> Vec<usize> {
        let set = &self.subgroups[w].0;
        let mut covered = FixedBitSet::with_capacity(self.group.order());
        let mut reps = Vec::new();
        for t in 0..self.group.order() {
            if covered.contains(t) {
                continue;
            }
            reps.push(t);
            for h in set.ones() {
                covered.insert(self.group.mul(h, t));
            }
        }
        reps
    }
}

fn any_unit(spec: &GroupSpec, genus: u64, shapes: &[Shape], max_attempts: usize) -> UnitResult {
    let mut result = UnitResult::default();
    let name = spec_name(spec);
    let group = match spec.build() {
        Ok(g) => Arc::new(g),
        Err(e) => {
            result.diagnostics.push(format!("{name}: {e}"));
            return result;
        }
    };
    let n = group.order() as u64;
    let divs = divisors(n);
    let work: Vec<(&Shape, Vec<Pattern>)> =
        shapes.iter().map(|s| (s, index_patterns(s, &divs, genus))).filter(|(_, p)| !p.is_empty()).collect();
    if work.is_empty() {
        return result;
    }
    let lattice = match subgroup_lattice(&group, usize::MAX) {
        Ok(l) => l,
        Err(e) => {
            result.diagnostics.push(format!("{name}: {e}"));
            return result;
        }
    };
    let stabilizers = match point_stabilizer_subgroups(&group) {
        Ok(s) => s,
        Err(e) => {
            result.diagnostics.push(format!("{name}: {e}"));
            return result;
        }
    };
    let mut data = TargetData {
        group: group.clone(),
        subgroups: lattice.into_iter().map(|s| (s.elements, s.generators)).collect(),
        by_index: HashMap::new(),
        stabilizers,
        menus: HashMap::new(),
    };
    for (i, (set, _)) in data.subgroups.iter().enumerate() {
        let index = n / set.count_ones(..) as u64;
        if index <= 3 * (genus - 1) {
            data.by_index.entry(index).or_default().push(i);
        }
    }
    let mut builder = AnyBuilder { cache: HashMap::new(), edge_cache: HashMap::new() };
    for (shape, patterns) in work {
        for p in patterns {
            let mut search = RealizeSearch {
                shape,
                pattern: &p,
                genus,
                name: &name,
                tree: shape.tree(),
                vertex: vec![usize::MAX; shape.vertices],
                edge_group: vec![None; shape.edges.len()],
                stable: vec![0; shape.edges.len()],
                attempts: 0,
                max_attempts,
                found: None,
            };
            search.vertices(0, &mut data, &mut builder);
            if search.attempts >= max_attempts && search.found.is_none() {
                result.diagnostics.push(format!("{name}: attempt budget exhausted on a pattern of shape {:?}", shape.edges));
            }
            if let Some(found) = search.found {
                result.instances.push(found);
            }
        }
    }
    result
}

/// A vertex group, the local index of each of its elements, and its embedding.
type VertexData = (Arc<FiniteGroup>, HashMap<usize, usize>, Vec<u32>);

struct AnyBuilder {
    cache: HashMap<usize, VertexData>,
    edge_cache: HashMap<FixedBitSet, (Arc<FiniteGroup>, Vec<u32>)>,
}

impl AnyBuilder {
    fn vertex(&mut self, data: &TargetData, v: usize) -> VertexData {
        self.cache
            .entry(v)
            .or_insert_with(|| {
                let (g, emb) = data.group.subgroup_with_embedding(&data.subgroups[v].1);
                let local = emb.iter().enumerate().map(|(i, &x)| (x as usize, i)).collect();
                (Arc::new(g), local, emb)
            })
            .clone()
    }

    fn edge(&mut self, data: &TargetData, set: &FixedBitSet) -> (Arc<FiniteGroup>, Vec<u32>) {
        self.edge_cache
            .entry(set.clone())
            .or_insert_with(|| {
                let mut gens = Vec::new();
                let mut span = FixedBitSet::with_capacity(data.group.order());
                span.insert(0);
                for x in set.ones() {
                    if !span.contains(x) {
                        gens.push(x);
                        span = data.group.generated(&gens);
                    }
                }
                let (g, emb) = data.group.subgroup_with_embedding(&gens);
                (Arc::new(g), emb)
            })
            .clone()
    }
}

struct RealizeSearch<'a> {
    shape: &'a Shape,
    pattern: &'a Pattern,
    genus: u64,
    name: &'a str,
    tree: (Vec<usize>, Vec<Option<usize>>, Vec<bool>),
    vertex: Vec<usize>,
    edge_group: Vec<Option<FixedBitSet>>,
    stable: Vec<usize>,
    attempts: usize,
    max_attempts: usize,
    found: Option<(InstanceSummary, InstanceDocument)>,
}

impl RealizeSearch<'_> {
    fn done(&self) -> bool {
        self.found.is_some() || self.attempts >= self.max_attempts
    }

    fn edge_order(&self, k: usize, n: u64) -> usize {
        (n / self.pattern.r[k]) as usize
    }

    fn vertices(&mut self, i: usize, data: &mut TargetData, b: &mut AnyBuilder) {
        if self.done() {
            return;
        }
        if i == self.shape.vertices {
            return self.loops(0, data, b);
        }
        let n = data.group.order() as u64;
        let v = self.tree.0[i];
        let candidates = data.by_index.get(&self.pattern.q[v]).cloned().unwrap_or_default();
        if i == 0 {
            for w in data.class_representatives(&candidates) {
                self.vertex[v] = w;
                self.vertices(1, data, b);
                if self.done() {
                    return;
                }
            }
            return;
        }
        let k = self.tree.1[v].expect("tree edge");
        let (a, c) = self.shape.edges[k];
        let parent = if a == v { c } else { a };
        let order = self.edge_order(k, n);
        let parent_menu: Vec<FixedBitSet> =
            data.menu(self.vertex[parent]).0.iter().filter(|h| h.count_ones(..) == order).cloned().collect();
        for w in candidates {
            let shared: Vec<FixedBitSet> = {
                let lookup = &data.menu(w).1;
                parent_menu.iter().filter(|h| lookup.contains(*h)).cloned().collect()
            };
            for h in shared {
                self.vertex[v] = w;
                self.edge_group[k] = Some(h);
                self.stable[k] = 0;
                self.vertices(i + 1, data, b);
                if self.done() {
                    return;
                }
            }
        }
    }

    /// Edges outside the tree: a group at the first end and a conjugator.
    fn loops(&mut self, k: usize, data: &mut TargetData, b: &mut AnyBuilder) {
        if self.done() {
            return;
        }
        if k == self.shape.edges.len() {
            self.attempts += 1;
            return self.finish(data, b);
        }
        if self.tree.2[k] {
            return self.loops(k + 1, data, b);
        }
        let n = data.group.order() as u64;
        let (u, v) = self.shape.edges[k];
        let order = self.edge_order(k, n);
        let from: Vec<FixedBitSet> =
            data.menu(self.vertex[u]).0.iter().filter(|h| h.count_ones(..) == order).cloned().collect();
        let reps = data.coset_reps(self.vertex[v]);
        for h in from {
            for &t in &reps {
                let image = conjugate_set(&data.group, t, &h);
                if !data.menu(self.vertex[v]).1.contains(&image) {
                    continue;
                }
                self.edge_group[k] = Some(h.clone());
                self.stable[k] = t;
                self.loops(k + 1, data, b);
                if self.done() {
                    return;
                }
            }
        }
    }

    fn finish(&mut self, data: &TargetData, b: &mut AnyBuilder) {
        let g = &data.group;
        let mut gens: Vec<usize> = self.vertex.iter().flat_map(|&v| data.subgroups[v].1.iter().copied()).collect();
        gens.extend(self.stable.iter().copied());
        if g.generated(&gens).count_ones(..) != g.order() {
            return;
        }
        if let Ok((graph, s)) = self.build(data, b) {
            if let Ok(found) = verify_candidate(&graph, &s, self.genus, self.shape, self.name) {
                self.found = Some(found);
            }
        }
    }

    fn build(&self, data: &TargetData, b: &mut AnyBuilder) -> Result<(GraphOfGroups, Surjection)> {
        let g = &data.group;
        let vdata: Vec<_> = self.vertex.iter().map(|&v| b.vertex(data, v)).collect();
        let vertices =
            vdata.iter().enumerate().map(|(i, d)| Vertex { id: VertexId(i as u32), group: d.0.clone() }).collect();
        let mut edges = Vec::new();
        for (k, &(u, v)) in self.shape.edges.iter().enumerate() {
            let h = self.edge_group[k].as_ref().expect("edge assigned");
            let (hg, emb) = b.edge(data, h);
            let t = self.stable[k];
            let local = |d: &VertexData, x: usize| -> Result<usize> {
                d.1.get(&x).copied().ok_or_else(|| Error::Search("edge group leaves its vertex group".into()))
            };
            let alpha: Vec<usize> =
                hg.generators().iter().map(|&x| local(&vdata[u], emb[x] as usize)).collect::<Result<_>>()?;
            let omega: Vec<usize> =
                hg.generators().iter().map(|&x| local(&vdata[v], g.conj(t, emb[x] as usize))).collect::<Result<_>>()?;
            edges.push(Edge {
                id: EdgeId(k as u32),
                group: hg.clone(),
                ends: (VertexId(u as u32), VertexId(v as u32)),
                alpha: GroupHom::new(hg.clone(), vdata[u].0.clone(), alpha)?,
                omega: GroupHom::new(hg.clone(), vdata[v].0.clone(), omega)?,
            });
        }
        let graph = GraphOfGroups::new(vertices, edges)?;
        let images = vdata
            .iter()
            .enumerate()
            .map(|(i, d)| (VertexId(i as u32), d.0.generators().iter().map(|&x| d.2[x] as usize).collect()))
            .collect();
        let tree = graph.spanning_tree();
        let stable = (0..self.shape.edges.len())
            .filter(|&k| !tree.tree_edges.contains(&EdgeId(k as u32)))
            .map(|k| (EdgeId(k as u32), self.stable[k]))
            .collect();
        Surjection::new(&graph, g.clone(), &images, &stable).map(|s| (graph, s))
    }
}

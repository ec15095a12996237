//! The cover of a graph of groups associated to the kernel of a surjection:
//! its coset graph, genus, action on first homology, and the faithfulness
//! verdict through the maximal finite normal subgroup.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gog::{reduce_to_normal_form, EdgeId, GraphOfGroups, VertexId};
use crate::groups::{normal_core, FiniteGroup};
use crate::homsearch::Surjection;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CosetVertex {
    pub vertex: VertexId,
    /// Smallest element of the coset.
    pub rep: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CosetEdge {
    pub edge: EdgeId,
    pub rep: usize,
    /// Indices into the coset vertex list.
    pub ends: (usize, usize),
}

/// Quotient of the Bass–Serre tree by the kernel of `phi`: one vertex per
/// coset `g phi(G_v)`, one edge per coset `g phi(alpha_e(G_e))`.
#[derive(Debug, Clone)]
pub struct CosetGraph {
    target: Arc<FiniteGroup>,
    pub vertices: Vec<CosetVertex>,
    pub edges: Vec<CosetEdge>,
    /// Per graph vertex: element -> coset vertex index.
    vertex_cosets: Vec<Vec<u32>>,
    /// Per graph edge: element -> coset edge index.
    edge_cosets: Vec<Vec<u32>>,
    edge_slot: BTreeMap<EdgeId, usize>,
    vertex_slot: BTreeMap<VertexId, usize>,
}

/// Partition of `group` into left cosets of `sub`, numbered from `offset`
/// in order of their smallest element.
fn left_cosets(group: &FiniteGroup, sub: &FixedBitSet, offset: usize, reps: &mut Vec<usize>) -> Vec<u32> {
    let mut coset = vec![u32::MAX; group.order()];
    for g in 0..group.order() {
        if coset[g] != u32::MAX {
            continue;
        }
        let id = (offset + reps.len()) as u32;
        reps.push(g);
        for h in sub.ones() {
            coset[group.mul(g, h)] = id;
        }
    }
    coset
}

pub fn build_coset_graph(graph: &GraphOfGroups, s: &Surjection) -> CosetGraph {
    let target = s.target().clone();
    let mut vertices = Vec::new();
    let mut vertex_cosets = Vec::new();
    let mut vertex_slot = BTreeMap::new();
    for (slot, v) in graph.vertices().iter().enumerate() {
        let mut reps = Vec::new();
        let table = left_cosets(&target, &s.vertex_hom(v.id).image_set(), vertices.len(), &mut reps);
        vertices.extend(reps.into_iter().map(|rep| CosetVertex { vertex: v.id, rep }));
        vertex_cosets.push(table);
        vertex_slot.insert(v.id, slot);
    }
    let mut edges = Vec::new();
    let mut edge_cosets = Vec::new();
    let mut edge_slot = BTreeMap::new();
    for (slot, e) in graph.edges().iter().enumerate() {
        let phi_u = s.vertex_hom(e.ends.0);
        let image = phi_u.image_of(&e.alpha.image_set());
        let mut reps = Vec::new();
        let table = left_cosets(&target, &image, edges.len(), &mut reps);
        let t_inv = target.inv(s.stable_image(e.id));
        let (su, sv) = (vertex_slot[&e.ends.0], vertex_slot[&e.ends.1]);
        for rep in reps {
            let start = vertex_cosets[su][rep] as usize;
            let end = vertex_cosets[sv][target.mul(rep, t_inv)] as usize;
            edges.push(CosetEdge { edge: e.id, rep, ends: (start, end) });
        }
        edge_cosets.push(table);
        edge_slot.insert(e.id, slot);
    }
    CosetGraph { target, vertices, edges, vertex_cosets, edge_cosets, edge_slot, vertex_slot }
}

impl CosetGraph {
    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    /// Image of coset vertex `i` under left multiplication by `x`.
    pub fn act_vertex(&self, x: usize, i: usize) -> usize {
        let v = &self.vertices[i];
        self.vertex_cosets[self.vertex_slot[&v.vertex]][self.target.mul(x, v.rep)] as usize
    }

    pub fn act_edge(&self, x: usize, i: usize) -> usize {
        let e = &self.edges[i];
        self.edge_cosets[self.edge_slot[&e.edge]][self.target.mul(x, e.rep)] as usize
    }

    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.ends.0), find(&mut parent, e.ends.1));
            parent[a] = b;
        }
        (0..self.vertices.len()).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// DOT source; cosets of one graph vertex or edge share a colour, so
    /// colours mark the orbits of the action.
    pub fn to_dot(&self) -> String {
        const PALETTE: [&str; 8] =
            ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
        let mut out = String::from("graph cover {\n  node [style=filled, fontcolor=white];\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let colour = PALETTE[self.vertex_slot[&v.vertex] % PALETTE.len()];
            let _ = writeln!(out, "  c{i} [label=\"{}:{}\", fillcolor=\"{colour}\"];", v.vertex, v.rep);
        }
        for e in &self.edges {
            let colour = PALETTE[self.edge_slot[&e.edge] % PALETTE.len()];
            let _ = writeln!(out, "  c{} -- c{} [label=\"{}:{}\", color=\"{colour}\"];", e.ends.0, e.ends.1, e.edge, e.rep);
        }
        out.push_str("}\n");
        out
    }
}

/// Cycle rank `E - V + 1`; the kernel of `phi` is free of this rank.
pub fn genus_of_cover(c: &CosetGraph) -> Result<u64> {
    let components = c.component_count();
    if components != 1 {
        return Err(Error::DisconnectedCover { components });
    }
    Ok((c.edges.len() + 1 - c.vertices.len()) as u64)
}

pub type IntMatrix = Vec<Vec<i64>>;

/// Action of the target group on `H_1` of the cover in the basis of
/// fundamental cycles of a breadth-first spanning tree.
#[derive(Debug, Clone, Serialize)]
pub struct H1Action {
    pub genus: usize,
    /// Coset edge index closing each basis cycle.
    pub basis: Vec<usize>,
    /// Matrix of every element of the target, column `j` the image of basis
    /// cycle `j`.
    #[serde(skip)]
    pub element_matrices: Vec<IntMatrix>,
    /// Generators of the target and their matrices.
    pub generators: Vec<usize>,
    pub matrices: Vec<IntMatrix>,
}

pub fn h1_action(c: &CosetGraph) -> Result<H1Action> {
    let components = c.component_count();
    if components != 1 {
        return Err(Error::DisconnectedCover { components });
    }
    let nv = c.vertices.len();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (i, e) in c.edges.iter().enumerate() {
        incident[e.ends.0].push(i);
        if e.ends.1 != e.ends.0 {
            incident[e.ends.1].push(i);
        }
    }
    // path[w]: signed edges of the tree path from vertex 0 to w.
    let mut path: Vec<Option<Vec<(usize, i64)>>> = vec![None; nv];
    let mut in_tree = vec![false; c.edges.len()];
    path[0] = Some(Vec::new());
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for &i in &incident[x] {
            let e = &c.edges[i];
            let (other, sign) = if e.ends.0 == x { (e.ends.1, 1) } else { (e.ends.0, -1) };
            if path[other].is_none() {
                let mut p = path[x].clone().unwrap();
                p.push((i, sign));
                path[other] = Some(p);
                in_tree[i] = true;
                queue.push_back(other);
            }
        }
    }
    let path: Vec<Vec<(usize, i64)>> = path.into_iter().map(Option::unwrap).collect();
    let basis: Vec<usize> = (0..c.edges.len()).filter(|&i| !in_tree[i]).collect();
    let mut coordinate = vec![usize::MAX; c.edges.len()];
    for (k, &i) in basis.iter().enumerate() {
        coordinate[i] = k;
    }
    let cycles: Vec<Vec<(usize, i64)>> = basis
        .iter()
        .map(|&f| {
            let e = &c.edges[f];
            let mut z = path[e.ends.0].clone();
            z.push((f, 1));
            z.extend(path[e.ends.1].iter().map(|&(i, s)| (i, -s)));
            z
        })
        .collect();
    let g = basis.len();
    let target = c.target();
    let element_matrices: Vec<IntMatrix> = (0..target.order())
        .map(|x| {
            let mut m = vec![vec![0i64; g]; g];
            for (j, z) in cycles.iter().enumerate() {
                for &(i, s) in z {
                    let k = coordinate[c.act_edge(x, i)];
                    if k != usize::MAX {
                        m[k][j] += s;
                    }
                }
            }
            m
        })
        .collect();
    let generators = target.generators().to_vec();
    let matrices = generators.iter().map(|&s| element_matrices[s].clone()).collect();
    Ok(H1Action { genus: g, basis, element_matrices, generators, matrices })
}

fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let mut out = vec![vec![0i64; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] != 0 {
                for j in 0..n {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    out
}

fn is_identity(m: &IntMatrix) -> bool {
    m.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, &x)| x == (i == j) as i64))
}

/// Exact integer determinant by fraction-free elimination.
pub fn determinant(m: &IntMatrix) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else { return 0 };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

impl H1Action {
    /// `M(s a) = M(s) M(a)` for every generator `s` and element `a`.
    pub fn is_representation(&self, target: &FiniteGroup) -> bool {
        (0..target.order()).all(|a| {
            target.generators().iter().all(|&s| {
                mat_mul(&self.element_matrices[s], &self.element_matrices[a]) == self.element_matrices[target.mul(s, a)]
            })
        })
    }

    pub fn determinants(&self) -> Vec<i128> {
        self.matrices.iter().map(determinant).collect()
    }

    /// Elements acting trivially on `H_1`.
    pub fn kernel(&self) -> Vec<usize> {
        (0..self.element_matrices.len()).filter(|&x| is_identity(&self.element_matrices[x])).collect()
    }
}

/// The subgroups `N_v` of a consistent family, one per vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalFamily {
    pub members: BTreeMap<VertexId, Vec<usize>>,
    pub order: usize,
}

impl NormalFamily {
    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }
}

/// Maximal finite normal subgroup of the fundamental group, as the greatest
/// family `N_v <| G_v` compatible with every edge, computed on the normal
/// form of the graph. A single vertex without edges gives `N = G_v`.
pub fn max_finite_normal_subgroup(graph: &GraphOfGroups) -> NormalFamily {
    let g = reduce_to_normal_form(graph);
    let mut n: BTreeMap<VertexId, FixedBitSet> = g
        .vertices()
        .iter()
        .map(|v| {
            let mut all = FixedBitSet::with_capacity(v.group.order());
            all.insert_range(..);
            (v.id, all)
        })
        .collect();
    loop {
        let before = n.clone();
        for e in g.edges() {
            let mut ne = e.alpha.preimage(&n[&e.ends.0]);
            ne.intersect_with(&e.omega.preimage(&n[&e.ends.1]));
            n.get_mut(&e.ends.0).unwrap().intersect_with(&e.alpha.image_of(&ne));
            n.get_mut(&e.ends.1).unwrap().intersect_with(&e.omega.image_of(&ne));
        }
        for v in g.vertices() {
            let core = normal_core(&v.group, &n[&v.id]);
            n.insert(v.id, core);
        }
        if n == before {
            break;
        }
    }
    let order = n.values().next().map_or(1, |s| s.count_ones(..));
    NormalFamily { members: n.into_iter().map(|(v, s)| (v, s.ones().collect())).collect(), order }
}

#[derive(Debug, Clone, Serialize)]
pub struct FaithfulnessReport {
    pub faithful: bool,
    pub normal_subgroup: NormalFamily,
    /// `phi(N)` as elements of the target.
    pub image: Vec<usize>,
    pub h1_kernel: Option<Vec<usize>>,
    /// `phi(N)` lies in the kernel of the `H_1` action.
    pub image_in_h1_kernel: Option<bool>,
    /// The `H_1` action is faithful, which implies a faithful action.
    pub h1_faithful: Option<bool>,
}

impl FaithfulnessReport {
    /// The graph-level verdict and the homology corroboration agree.
    pub fn consistent(&self) -> bool {
        self.image_in_h1_kernel != Some(false) && !(self.h1_faithful == Some(true) && !self.faithful)
    }
}

/// Faithful iff the fundamental group has no nontrivial finite normal
/// subgroup; the `H_1` action is reported as corroboration.
pub fn is_faithful(graph: &GraphOfGroups, s: &Surjection, with_h1: bool) -> Result<FaithfulnessReport> {
    let family = max_finite_normal_subgroup(graph);
    let mut image = FixedBitSet::with_capacity(s.target().order());
    for (v, members) in &family.members {
        for &a in members {
            image.insert(s.vertex_hom(*v).apply(a));
        }
    }
    let image: Vec<usize> = image.ones().collect();
    let (h1_kernel, image_in_h1_kernel, h1_faithful) = if with_h1 {
        let action = h1_action(&build_coset_graph(graph, s))?;
        let kernel = action.kernel();
        let inside = image.iter().all(|x| kernel.binary_search(x).is_ok());
        let faithful = kernel.len() == 1;
        (Some(kernel), Some(inside), Some(faithful))
    } else {
        (None, None, None)
    };
    Ok(FaithfulnessReport {
        faithful: family.is_trivial(),
        normal_subgroup: family,
        image,
        h1_kernel,
        image_in_h1_kernel,
        h1_faithful,
    })
}

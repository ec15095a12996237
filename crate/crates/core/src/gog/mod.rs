//! Finite graphs of finite groups.

mod presentation;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupHom};

pub use presentation::{fundamental_presentation, Presentation, PresentationGenerator};

/// Exact rational numbers for Euler characteristics.
pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub id: VertexId,
    pub group: Arc<FiniteGroup>,
}

/// A geometric edge stored with one orientation; `alpha` embeds the edge
/// group at the first end, `omega` at the second. Loops have equal ends.
#[derive(Debug, Clone)]
pub struct Edge {
    pub id: EdgeId,
    pub group: Arc<FiniteGroup>,
    pub ends: (VertexId, VertexId),
    pub alpha: GroupHom,
    pub omega: GroupHom,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.ends.0 == self.ends.1
    }
}

#[derive(Debug, Clone)]
pub struct GraphOfGroups {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

/// Breadth-first spanning tree from the smallest vertex id.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    pub order: Vec<VertexId>,
    pub parent: BTreeMap<VertexId, EdgeId>,
    pub tree_edges: BTreeSet<EdgeId>,
}

fn edge_error(edge: EdgeId, reason: impl Into<String>) -> Error {
    Error::InvalidEdge { edge, reason: reason.into() }
}

impl GraphOfGroups {
    /// Validates ids, incidences, edge monomorphisms and connectivity.
    pub fn new(mut vertices: Vec<Vertex>, mut edges: Vec<Edge>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Disconnected { components: 0 });
        }
        vertices.sort_by_key(|v| v.id);
        edges.sort_by_key(|e| e.id);
        if vertices.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::InvalidGroup("duplicate vertex id".into()));
        }
        if let Some(w) = edges.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(edge_error(w[0].id, "duplicate edge id"));
        }
        let graph = GraphOfGroups { vertices, edges };
        for e in &graph.edges {
            let (u, v) = e.ends;
            let gu = &graph.vertex(u).ok_or(Error::UnknownVertex(u))?.group;
            let gv = &graph.vertex(v).ok_or(Error::UnknownVertex(v))?.group;
            for (name, hom, target) in [("alpha", &e.alpha, gu), ("omega", &e.omega, gv)] {
                if !Arc::ptr_eq(hom.domain(), &e.group) && hom.domain().order() != e.group.order() {
                    return Err(edge_error(e.id, format!("{name} is not defined on the edge group")));
                }
                if !Arc::ptr_eq(hom.codomain(), target) && hom.codomain().order() != target.order() {
                    return Err(edge_error(e.id, format!("{name} does not land in the end vertex group")));
                }
                if !hom.is_injective() {
                    return Err(edge_error(e.id, format!("{name} is not injective")));
                }
            }
        }
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(graph)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.binary_search_by_key(&id, |v| v.id).ok().map(|i| &self.vertices[i])
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.binary_search_by_key(&id, |e| e.id).ok().map(|i| &self.edges[i])
    }

    pub fn vertex_index(&self, id: VertexId) -> Option<usize> {
        self.vertices.binary_search_by_key(&id, |v| v.id).ok()
    }

    /// Number of edge ends at `v` (loops count twice).
    pub fn valence(&self, v: VertexId) -> usize {
        self.edges.iter().map(|e| (e.ends.0 == v) as usize + (e.ends.1 == v) as usize).sum()
    }

    fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for e in &self.edges {
            let a = self.vertex_index(e.ends.0).unwrap();
            let b = self.vertex_index(e.ends.1).unwrap();
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        (0..self.vertices.len()).filter(|&i| find(&mut parent, i) == i).count()
    }

    pub fn spanning_tree(&self) -> SpanningTree {
        let mut order = vec![self.vertices[0].id];
        let mut visited = BTreeSet::from([self.vertices[0].id]);
        let mut parent = BTreeMap::new();
        let mut tree_edges = BTreeSet::new();
        let mut queue = VecDeque::from([self.vertices[0].id]);
        while let Some(x) = queue.pop_front() {
            for e in &self.edges {
                let other = if e.ends.0 == x {
                    e.ends.1
                } else if e.ends.1 == x {
                    e.ends.0
                } else {
                    continue;
                };
                if visited.insert(other) {
                    parent.insert(other, e.id);
                    tree_edges.insert(e.id);
                    order.push(other);
                    queue.push_back(other);
                }
            }
        }
        SpanningTree { order, parent, tree_edges }
    }

    /// First Betti number of the underlying graph.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    /// Non-loop edges whose group is carried onto a whole end vertex group.
    pub fn trivial_edges(&self) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|e| !e.is_loop() && (e.alpha.is_bijective() || e.omega.is_bijective()))
            .map(|e| e.id)
            .collect()
    }

    pub fn is_normal_form(&self) -> bool {
        self.trivial_edges().is_empty()
    }

    pub fn max_vertex_id(&self) -> u32 {
        self.vertices.iter().map(|v| v.id.0).max().unwrap_or(0)
    }

    pub fn max_edge_id(&self) -> Option<u32> {
        self.edges.iter().map(|e| e.id.0).max()
    }
}

/// `sum 1/|G_v| - sum 1/|G_e|`
pub fn euler_characteristic(g: &GraphOfGroups) -> Rational {
    let inv = |n: usize| BigRational::new(BigInt::one(), BigInt::from(n));
    let mut chi = BigRational::zero();
    for v in g.vertices() {
        chi += inv(v.group.order());
    }
    for e in g.edges() {
        chi -= inv(e.group.order());
    }
    chi
}

/// The genus `g = -chi * n + 1` of the handle covering the graph with a
/// group of order `n`.
pub fn genus_from_order(g: &GraphOfGroups, n: u64) -> Result<u64> {
    let value = -euler_characteristic(g) * BigRational::from_integer(BigInt::from(n)) + BigRational::one();
    if !value.is_integer() {
        return Err(Error::Inadmissible { order: n, value: (value - BigRational::one()).to_string() });
    }
    if value.is_negative() {
        return Err(Error::NegativeGenus { order: n, value: value.to_string() });
    }
    Ok(value.to_integer().to_u64().expect("genus fits in u64"))
}

/// Collapses trivial edges until none remain.
pub fn reduce_to_normal_form(g: &GraphOfGroups) -> GraphOfGroups {
    let mut vertices = g.vertices.clone();
    let mut edges = g.edges.clone();
    loop {
        let Some(pos) = edges
            .iter()
            .position(|e| !e.is_loop() && (e.alpha.is_bijective() || e.omega.is_bijective()))
        else {
            break;
        };
        let e = edges.remove(pos);
        // `gone` is absorbed into `kept` through `psi: G_gone -> G_kept`.
        let (gone, kept, psi) = if e.alpha.is_bijective() {
            (e.ends.0, e.ends.1, e.alpha.inverse().unwrap().then(&e.omega))
        } else {
            (e.ends.1, e.ends.0, e.omega.inverse().unwrap().then(&e.alpha))
        };
        vertices.retain(|v| v.id != gone);
        for other in &mut edges {
            if other.ends.0 == gone {
                other.ends.0 = kept;
                other.alpha = other.alpha.then(&psi);
            }
            if other.ends.1 == gone {
                other.ends.1 = kept;
                other.omega = other.omega.then(&psi);
            }
        }
    }
    GraphOfGroups { vertices, edges }
}

/// Replaces edge `e` by two edges through a new vertex carrying `G_e`.
pub fn subdivide_edge(g: &GraphOfGroups, e: EdgeId) -> Result<GraphOfGroups> {
    let old = g.edge(e).ok_or(Error::UnknownEdge(e))?.clone();
    let w = VertexId(g.max_vertex_id() + 1);
    let new_edge = EdgeId(g.max_edge_id().map_or(0, |m| m + 1));
    let id = GroupHom::identity(old.group.clone());
    let mut vertices = g.vertices.clone();
    vertices.push(Vertex { id: w, group: old.group.clone() });
    let mut edges: Vec<Edge> = g.edges.iter().filter(|x| x.id != e).cloned().collect();
    edges.push(Edge { id: e, group: old.group.clone(), ends: (old.ends.0, w), alpha: old.alpha.clone(), omega: id.clone() });
    edges.push(Edge { id: new_edge, group: old.group.clone(), ends: (w, old.ends.1), alpha: id, omega: old.omega });
    GraphOfGroups::new(vertices, edges)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::groups::make_cyclic;

    fn cyc(n: u32) -> Arc<FiniteGroup> {
        Arc::new(make_cyclic(n).unwrap())
    }

    /// Canonical embedding `Z_e -> Z_m`, generator to `m/e`.
    fn emb(e: &Arc<FiniteGroup>, m: &Arc<FiniteGroup>) -> GroupHom {
        let images = if e.order() > 1 { vec![m.order() / e.order()] } else { vec![] };
        GroupHom::new(e.clone(), m.clone(), images).unwrap()
    }

    fn edge(id: u32, e: &Arc<FiniteGroup>, u: (u32, &Arc<FiniteGroup>), v: (u32, &Arc<FiniteGroup>)) -> Edge {
        Edge { id: EdgeId(id), group: e.clone(), ends: (VertexId(u.0), VertexId(v.0)), alpha: emb(e, u.1), omega: emb(e, v.1) }
    }

    fn vertex(id: u32, g: &Arc<FiniteGroup>) -> Vertex {
        Vertex { id: VertexId(id), group: g.clone() }
    }

    fn frac(p: i64, q: i64) -> Rational {
        BigRational::new(p.into(), q.into())
    }

    pub(crate) fn cyclic_example(x: u32) -> GraphOfGroups {
        let (a, b, c) = (cyc(2 * x), cyc(x * (x + 1)), cyc(3 * (x + 1)));
        let (ex, ex1) = (cyc(x), cyc(x + 1));
        GraphOfGroups::new(
            vec![vertex(0, &a), vertex(1, &b), vertex(2, &c)],
            vec![edge(0, &ex, (0, &a), (1, &b)), edge(1, &ex1, (1, &b), (2, &c))],
        )
        .unwrap()
    }

    #[test]
    fn chi_examples() {
        let single = GraphOfGroups::new(vec![vertex(0, &cyc(1))], vec![]).unwrap();
        assert_eq!(euler_characteristic(&single), frac(1, 1));
        assert_eq!(euler_characteristic(&cyclic_example(3)), frac(-1, 4));
        assert_eq!(genus_from_order(&cyclic_example(3), 12).unwrap(), 4);
    }

    #[test]
    fn genus_edge_cases() {
        let z5 = cyc(5);
        let single = GraphOfGroups::new(vec![vertex(0, &z5)], vec![]).unwrap();
        assert_eq!(genus_from_order(&single, 5).unwrap(), 0);
        assert!(matches!(genus_from_order(&single, 10), Err(Error::NegativeGenus { .. })));
        assert!(matches!(genus_from_order(&cyclic_example(3), 7), Err(Error::Inadmissible { .. })));
    }

    #[test]
    fn collapse_trivial_edge() {
        let (z2, z6) = (cyc(2), cyc(6));
        let g = GraphOfGroups::new(vec![vertex(0, &z2), vertex(1, &z6)], vec![edge(0, &z2, (0, &z2), (1, &z6))]).unwrap();
        assert_eq!(g.trivial_edges(), vec![EdgeId(0)]);
        let r = reduce_to_normal_form(&g);
        assert_eq!(r.vertices().len(), 1);
        assert_eq!(r.vertices()[0].group.order(), 6);
        assert!(r.edges().is_empty());
    }

    #[test]
    fn normal_form_is_fixed() {
        let g = cyclic_example(3);
        assert!(g.is_normal_form());
        let r = reduce_to_normal_form(&g);
        assert_eq!(r.vertices().len(), 3);
        assert_eq!(r.edges().len(), 2);
    }

    #[test]
    fn chain_of_trivial_edges() {
        let (z2, z4, z8) = (cyc(2), cyc(4), cyc(8));
        let g = GraphOfGroups::new(
            vec![vertex(0, &z2), vertex(1, &z4), vertex(2, &z8)],
            vec![edge(0, &z2, (0, &z2), (1, &z4)), edge(1, &z4, (1, &z4), (2, &z8))],
        )
        .unwrap();
        let r = reduce_to_normal_form(&g);
        assert_eq!(r.vertices().len(), 1);
        assert_eq!(r.vertices()[0].id, VertexId(2));
        assert_eq!(euler_characteristic(&r), euler_characteristic(&g));
    }

    #[test]
    fn collapse_reroutes_parallel_edges_into_loops() {
        let (z1, z2, z4) = (cyc(1), cyc(2), cyc(4));
        let g = GraphOfGroups::new(
            vec![vertex(0, &z2), vertex(1, &z4)],
            vec![edge(0, &z2, (0, &z2), (1, &z4)), edge(1, &z1, (0, &z2), (1, &z4))],
        )
        .unwrap();
        let r = reduce_to_normal_form(&g);
        assert_eq!(r.edges().len(), 1);
        assert!(r.edges()[0].is_loop());
        assert!(r.edges()[0].alpha.is_injective());
    }

    #[test]
    fn subdivision_preserves_chi() {
        let z3 = cyc(3);
        let looped = GraphOfGroups::new(vec![vertex(0, &z3)], vec![edge(0, &z3, (0, &z3), (0, &z3))]).unwrap();
        let s = subdivide_edge(&looped, EdgeId(0)).unwrap();
        assert_eq!(s.edges().len(), 2);
        assert_eq!(s.vertices()[1].group.order(), 3);
        assert_eq!(euler_characteristic(&s), euler_characteristic(&looped));

        let z1 = cyc(1);
        let path = GraphOfGroups::new(vec![vertex(0, &z3), vertex(1, &z3)], vec![edge(0, &z1, (0, &z3), (1, &z3))]).unwrap();
        let s = subdivide_edge(&path, EdgeId(0)).unwrap();
        assert_eq!(s.vertices().len(), 3);
        assert_eq!(s.vertex(VertexId(2)).unwrap().group.order(), 1);

        let ex = cyclic_example(3);
        let s = subdivide_edge(&ex, EdgeId(1)).unwrap();
        assert_eq!(euler_characteristic(&s), frac(-1, 4));
        assert!(matches!(subdivide_edge(&ex, EdgeId(9)), Err(Error::UnknownEdge(_))));
    }

    #[test]
    fn rejects_disconnected_and_empty() {
        let z2 = cyc(2);
        assert!(matches!(GraphOfGroups::new(vec![], vec![]), Err(Error::Disconnected { .. })));
        assert!(matches!(
            GraphOfGroups::new(vec![vertex(0, &z2), vertex(1, &z2)], vec![]),
            Err(Error::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn trivial_groups_give_cycle_rank() {
        let z1 = cyc(1);
        let g = GraphOfGroups::new(
            vec![vertex(0, &z1), vertex(1, &z1)],
            vec![edge(0, &z1, (0, &z1), (1, &z1)), edge(1, &z1, (0, &z1), (1, &z1)), edge(2, &z1, (1, &z1), (1, &z1))],
        )
        .unwrap();
        let betti = -euler_characteristic(&g) + BigRational::one();
        assert_eq!(betti, BigRational::from_integer(BigInt::from(g.cycle_rank())));
        assert_eq!(g.cycle_rank(), 2);
        assert_eq!(g.edges().len() - g.spanning_tree().tree_edges.len(), 2);
    }
}

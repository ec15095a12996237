//! Homomorphisms from the fundamental group of a graph of groups onto a
//! finite group, injective on every vertex group.

use std::collections::BTreeMap;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gog::{fundamental_presentation, EdgeId, GraphOfGroups, Presentation, PresentationGenerator, VertexId};
use crate::groups::{monomorphisms_extending, FiniteGroup, GroupHom};

pub const DEFAULT_LIMIT: usize = 10_000;

/// `phi: pi_1 -> G` given by a monomorphism per vertex group and an image
/// per stable letter.
#[derive(Debug, Clone)]
pub struct Surjection {
    presentation: Presentation,
    target: Arc<FiniteGroup>,
    vertex_homs: BTreeMap<VertexId, GroupHom>,
    stable: BTreeMap<EdgeId, usize>,
}

/// Serializable generator-image table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImageTable {
    pub vertices: BTreeMap<VertexId, Vec<usize>>,
    pub stable_letters: BTreeMap<EdgeId, usize>,
}

impl Surjection {
    /// Assembles a map from vertex generator images and stable letter
    /// images. Only the vertex relations are checked here; use
    /// [`verify_surjection`] for the rest.
    pub fn new(
        graph: &GraphOfGroups,
        target: Arc<FiniteGroup>,
        vertex_images: &BTreeMap<VertexId, Vec<usize>>,
        stable: &BTreeMap<EdgeId, usize>,
    ) -> Result<Self> {
        let presentation = fundamental_presentation(graph)?;
        let mut vertex_homs = BTreeMap::new();
        for v in graph.vertices() {
            let images = vertex_images
                .get(&v.id)
                .ok_or_else(|| Error::InvalidSurjection(format!("no images for vertex {}", v.id)))?;
            let hom = GroupHom::new(v.group.clone(), target.clone(), images.clone())
                .map_err(|e| Error::InvalidSurjection(format!("vertex {}: {e}", v.id)))?;
            vertex_homs.insert(v.id, hom);
        }
        let mut letters = BTreeMap::new();
        for (e, _) in presentation.stable_letters() {
            let t = *stable
                .get(&e)
                .ok_or_else(|| Error::InvalidSurjection(format!("no image for the stable letter of {e}")))?;
            if t >= target.order() {
                return Err(Error::InvalidSurjection(format!("stable letter image {t} is not in the target")));
            }
            letters.insert(e, t);
        }
        Ok(Surjection { presentation, target, vertex_homs, stable: letters })
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    pub fn vertex_hom(&self, v: VertexId) -> &GroupHom {
        &self.vertex_homs[&v]
    }

    /// Image of the stable letter of `e`; tree edges map to the identity.
    pub fn stable_image(&self, e: EdgeId) -> usize {
        self.stable.get(&e).copied().unwrap_or(0)
    }

    /// Images of all presentation generators, in presentation order.
    pub fn generator_images(&self) -> Vec<usize> {
        self.presentation
            .generators
            .iter()
            .map(|g| match *g {
                PresentationGenerator::Vertex { vertex, index } => self.vertex_homs[&vertex].images()[index],
                PresentationGenerator::Stable { edge } => self.stable[&edge],
            })
            .collect()
    }

    pub fn image_table(&self) -> ImageTable {
        ImageTable {
            vertices: self.vertex_homs.iter().map(|(v, h)| (*v, h.images().to_vec())).collect(),
            stable_letters: self.stable.clone(),
        }
    }
}

/// Re-checks a map from scratch: relators, injectivity on vertex groups and
/// surjectivity. Returns the first defect found.
pub fn surjection_defect(s: &Surjection) -> Option<String> {
    let pres = s.presentation();
    let target = s.target();
    let images = s.generator_images();
    for (i, r) in pres.relators.iter().enumerate() {
        if pres.evaluate(r, &images, target) != target.identity() {
            return Some(format!("relator {i} is not satisfied"));
        }
    }
    for (v, group) in pres.vertex_groups() {
        let mut seen = FixedBitSet::with_capacity(target.order());
        for a in 0..group.order() {
            let y = pres.evaluate(&pres.vertex_word(v, a), &images, target);
            if seen.put(y) {
                return Some(format!("not injective on the vertex group of {v}"));
            }
        }
    }
    if target.generated(&images).count_ones(..) != target.order() {
        return Some("not surjective".into());
    }
    None
}

pub fn verify_surjection(s: &Surjection) -> bool {
    surjection_defect(s).is_none()
}

#[derive(Debug, Clone)]
pub struct SurjectionSearch {
    pub surjections: Vec<Surjection>,
    /// More results exist beyond the limit.
    pub truncated: bool,
}

struct Search<'a> {
    graph: &'a GraphOfGroups,
    target: &'a Arc<FiniteGroup>,
    presentation: Presentation,
    order: Vec<VertexId>,
    parent: BTreeMap<VertexId, EdgeId>,
    non_tree: Vec<EdgeId>,
    assigned: BTreeMap<VertexId, GroupHom>,
    limit: usize,
    found: Vec<Surjection>,
}

impl Search<'_> {
    fn full(&self) -> bool {
        self.found.len() > self.limit
    }

    fn vertices(&mut self, depth: usize) {
        if self.full() {
            return;
        }
        if depth == self.order.len() {
            self.stable_letters();
            return;
        }
        let x = self.order[depth];
        let mut fixed = Vec::new();
        if let Some(&e) = self.parent.get(&x) {
            let edge = self.graph.edge(e).unwrap();
            let (here, there, p) = if edge.ends.1 == x {
                (&edge.omega, &edge.alpha, edge.ends.0)
            } else {
                (&edge.alpha, &edge.omega, edge.ends.1)
            };
            let phi_p = &self.assigned[&p];
            for &h in edge.group.generators() {
                fixed.push((here.apply(h), phi_p.apply(there.apply(h))));
            }
        }
        let domain = self.graph.vertex(x).unwrap().group.clone();
        let target = self.target.clone();
        monomorphisms_extending(&domain, &target, &fixed, &mut |hom| {
            self.assigned.insert(x, hom);
            self.vertices(depth + 1);
            self.assigned.remove(&x);
            !self.full()
        });
    }

    fn stable_letters(&mut self) {
        let target = self.target;
        let mut choices: Vec<Vec<usize>> = Vec::new();
        for &e in &self.non_tree {
            let edge = self.graph.edge(e).unwrap();
            let (pu, pv) = (&self.assigned[&edge.ends.0], &self.assigned[&edge.ends.1]);
            let pairs: Vec<(usize, usize)> = edge
                .group
                .generators()
                .iter()
                .map(|&h| (pu.apply(edge.alpha.apply(h)), pv.apply(edge.omega.apply(h))))
                .collect();
            let ts: Vec<usize> =
                (0..target.order()).filter(|&t| pairs.iter().all(|&(a, b)| target.conj(t, a) == b)).collect();
            if ts.is_empty() {
                return;
            }
            choices.push(ts);
        }
        let mut base: Vec<usize> = self.assigned.values().flat_map(|h| h.images().iter().copied()).collect();
        let onto = target.generated(&base).count_ones(..) == target.order();
        let mut pick = vec![0usize; choices.len()];
        loop {
            let letters: Vec<usize> = pick.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            let surjective = onto || {
                base.extend(&letters);
                let ok = target.generated(&base).count_ones(..) == target.order();
                base.truncate(base.len() - letters.len());
                ok
            };
            if surjective {
                self.found.push(Surjection {
                    presentation: self.presentation.clone(),
                    target: target.clone(),
                    vertex_homs: self.assigned.clone(),
                    stable: self.non_tree.iter().copied().zip(letters).collect(),
                });
                if self.full() {
                    return;
                }
            }
            // Odometer over the stable letter choices, last edge fastest.
            let mut k = pick.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                pick[k] += 1;
                if pick[k] < choices[k].len() {
                    break;
                }
                pick[k] = 0;
            }
        }
    }
}

/// All surjections onto `target` injective on vertex groups, in a fixed
/// order (vertex monomorphisms lexicographic along the spanning tree, then
/// stable letters), up to `limit` of them.
pub fn find_surjections(graph: &GraphOfGroups, target: &Arc<FiniteGroup>, limit: usize) -> SurjectionSearch {
    if !graph.is_normal_form() {
        log::warn!("surjection search on a graph that is not in normal form");
    }
    let presentation = fundamental_presentation(graph).expect("graphs of groups are connected");
    let tree = graph.spanning_tree();
    let non_tree = graph.edges().iter().map(|e| e.id).filter(|e| !tree.tree_edges.contains(e)).collect();
    let mut search = Search {
        graph,
        target,
        presentation,
        order: tree.order,
        parent: tree.parent,
        non_tree,
        assigned: BTreeMap::new(),
        limit,
        found: Vec::new(),
    };
    if graph.vertices().iter().all(|v| target.order().is_multiple_of(v.group.order())) {
        search.vertices(0);
    }
    let truncated = search.found.len() > limit;
    search.found.truncate(limit);
    SurjectionSearch { surjections: search.found, truncated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gog::{Edge, Vertex};
    use crate::groups::{make_cyclic, make_dihedral};

    fn cyc(n: u32) -> Arc<FiniteGroup> {
        Arc::new(make_cyclic(n).unwrap())
    }

    fn emb(e: &Arc<FiniteGroup>, m: &Arc<FiniteGroup>) -> GroupHom {
        let images = if e.order() > 1 { vec![m.order() / e.order()] } else { vec![] };
        GroupHom::new(e.clone(), m.clone(), images).unwrap()
    }

    fn z2_with_loop() -> GraphOfGroups {
        let (z1, z2) = (cyc(1), cyc(2));
        GraphOfGroups::new(
            vec![Vertex { id: VertexId(0), group: z2.clone() }],
            vec![Edge { id: EdgeId(0), group: z1.clone(), ends: (VertexId(0), VertexId(0)), alpha: emb(&z1, &z2), omega: emb(&z1, &z2) }],
        )
        .unwrap()
    }

    #[test]
    fn loop_over_z2() {
        let g = z2_with_loop();
        let found = find_surjections(&g, &cyc(2), 100);
        assert_eq!(found.surjections.len(), 2);
        assert!(!found.truncated);
        assert!(found.surjections.iter().all(verify_surjection));
        // Two generators into Z_2: three of four tuples are onto, one is
        // not injective on the vertex group.
        assert_eq!(found.surjections[0].generator_images(), vec![1, 0]);
    }

    #[test]
    fn truncation_flag() {
        let g = z2_with_loop();
        let found = find_surjections(&g, &cyc(2), 1);
        assert_eq!(found.surjections.len(), 1);
        assert!(found.truncated);
    }

    #[test]
    fn non_surjective_map_is_rejected() {
        let z3 = cyc(3);
        let g = GraphOfGroups::new(vec![Vertex { id: VertexId(0), group: z3 }], vec![]).unwrap();
        let s = Surjection::new(&g, cyc(12), &BTreeMap::from([(VertexId(0), vec![4])]), &BTreeMap::new()).unwrap();
        assert_eq!(surjection_defect(&s).as_deref(), Some("not surjective"));
    }

    #[test]
    fn broken_hnn_relation_is_rejected() {
        // Z_3 with a loop whose stable letter inverts it, mapped onto S_3.
        let z3 = cyc(3);
        let inversion = GroupHom::new(z3.clone(), z3.clone(), vec![2]).unwrap();
        let g = GraphOfGroups::new(
            vec![Vertex { id: VertexId(0), group: z3.clone() }],
            vec![Edge { id: EdgeId(0), group: z3.clone(), ends: (VertexId(0), VertexId(0)), alpha: GroupHom::identity(z3.clone()), omega: inversion }],
        )
        .unwrap();
        let d = Arc::new(make_dihedral(3).unwrap());
        let found = find_surjections(&g, &d, 1000);
        assert_eq!(found.surjections.len(), 6);
        let table = found.surjections[0].image_table();
        let mut letters = table.stable_letters.clone();
        letters.insert(EdgeId(0), 0);
        let bad = Surjection::new(&g, d.clone(), &table.vertices, &letters).unwrap();
        assert!(surjection_defect(&bad).unwrap().starts_with("relator"));
    }

    #[test]
    fn impossible_target_gives_nothing() {
        let g = z2_with_loop();
        assert!(find_surjections(&g, &cyc(3), 10).surjections.is_empty());
    }
}

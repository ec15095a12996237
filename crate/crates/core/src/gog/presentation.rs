use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use super::{EdgeId, GraphOfGroups, VertexId};
use crate::error::Result;
use crate::groups::{invert_word, FiniteGroup, Letter, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PresentationGenerator {
    /// Generator `index` of the vertex group.
    Vertex { vertex: VertexId, index: usize },
    /// Stable letter of a non-tree edge.
    Stable { edge: EdgeId },
}

/// Finite presentation of the fundamental group of a graph of groups.
///
/// For a non-tree edge with stable letter `t` the relation is
/// `t alpha(h) t^-1 = omega(h)`; tree edges identify `alpha(h)` with
/// `omega(h)`.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub generators: Vec<PresentationGenerator>,
    pub relators: Vec<Word>,
    pub spanning_tree: BTreeSet<EdgeId>,
    vertex_blocks: Vec<(VertexId, usize, Arc<FiniteGroup>)>,
}

impl Presentation {
    fn block(&self, v: VertexId) -> &(VertexId, usize, Arc<FiniteGroup>) {
        self.vertex_blocks.iter().find(|b| b.0 == v).expect("vertex in presentation")
    }

    /// Index of generator `index` of vertex group `v`.
    pub fn vertex_generator(&self, v: VertexId, index: usize) -> usize {
        self.block(v).1 + index
    }

    pub fn stable_letter(&self, e: EdgeId) -> Option<usize> {
        self.generators.iter().position(|g| *g == PresentationGenerator::Stable { edge: e })
    }

    pub fn stable_letters(&self) -> impl Iterator<Item = (EdgeId, usize)> + '_ {
        self.generators.iter().enumerate().filter_map(|(i, g)| match g {
            PresentationGenerator::Stable { edge } => Some((*edge, i)),
            _ => None,
        })
    }

    pub fn vertex_groups(&self) -> impl Iterator<Item = (VertexId, &Arc<FiniteGroup>)> + '_ {
        self.vertex_blocks.iter().map(|(v, _, g)| (*v, g))
    }

    /// A word in the presentation generators for element `a` of `G_v`.
    pub fn vertex_word(&self, v: VertexId, a: usize) -> Word {
        let (_, offset, group) = self.block(v);
        shift(group.word(a), *offset)
    }

    /// Evaluates `word` in `target` given images of all generators.
    pub fn evaluate(&self, word: &[Letter], images: &[usize], target: &FiniteGroup) -> usize {
        word.iter().fold(target.identity(), |acc, l| {
            let x = images[l.generator];
            target.mul(acc, if l.inverse { target.inv(x) } else { x })
        })
    }
}

fn shift(w: &[Letter], offset: usize) -> Word {
    w.iter().map(|l| Letter { generator: l.generator + offset, inverse: l.inverse }).collect()
}

pub fn fundamental_presentation(graph: &GraphOfGroups) -> Result<Presentation> {
    let tree = graph.spanning_tree();
    let mut generators = Vec::new();
    let mut relators = Vec::new();
    let mut vertex_blocks = Vec::new();
    for v in graph.vertices() {
        let offset = generators.len();
        for index in 0..v.group.generators().len() {
            generators.push(PresentationGenerator::Vertex { vertex: v.id, index });
        }
        relators.extend(v.group.presentation().relators.iter().map(|r| shift(r, offset)));
        vertex_blocks.push((v.id, offset, v.group.clone()));
    }
    let mut pres = Presentation { generators, relators, spanning_tree: tree.tree_edges.clone(), vertex_blocks };
    for e in graph.edges() {
        let stable = if tree.tree_edges.contains(&e.id) {
            None
        } else {
            pres.generators.push(PresentationGenerator::Stable { edge: e.id });
            Some(pres.generators.len() - 1)
        };
        for &h in e.group.generators() {
            let a = pres.vertex_word(e.ends.0, e.alpha.apply(h));
            let b = pres.vertex_word(e.ends.1, e.omega.apply(h));
            let mut r = Vec::new();
            match stable {
                Some(t) => {
                    r.push(Letter { generator: t, inverse: false });
                    r.extend(a);
                    r.push(Letter { generator: t, inverse: true });
                }
                None => r.extend(a),
            }
            r.extend(invert_word(&b));
            pres.relators.push(r);
        }
    }
    Ok(pres)
}

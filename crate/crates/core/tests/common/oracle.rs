//! Brute-force surjection enumeration and the graphs it is compared on.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use handlecalc::homsearch::verify_surjection;
use handlecalc::io::parse_instance;
use handlecalc::{FiniteGroup, GraphOfGroups, GroupHom, Surjection, VertexId};
use serde_json::json;

fn graph(vertices: &[serde_json::Value], edges: &[serde_json::Value]) -> GraphOfGroups {
    let vs: Vec<_> = vertices.iter().enumerate().map(|(i, g)| json!({"id": i, "group": g})).collect();
    parse_instance(&json!({"vertices": vs, "edges": edges}).to_string()).unwrap().graph
}

fn cyclic(n: u32) -> serde_json::Value {
    json!({"family": "cyclic", "n": n})
}

fn edge(id: u32, group: serde_json::Value, ends: [u32; 2], alpha: &[usize], omega: &[usize]) -> serde_json::Value {
    json!({"id": id, "group": group, "ends": ends, "alpha": alpha, "omega": omega})
}

pub fn graphs() -> Vec<(&'static str, GraphOfGroups)> {
    vec![
        ("Z2", graph(&[cyclic(2)], &[])),
        ("Z2 - Z3", graph(&[cyclic(2), cyclic(3)], &[edge(0, cyclic(1), [0, 1], &[], &[])])),
        ("Z2 loop", graph(&[cyclic(2)], &[edge(0, cyclic(1), [0, 0], &[], &[])])),
        ("Z4 -Z2- Z4", graph(&[cyclic(4), cyclic(4)], &[edge(0, cyclic(2), [0, 1], &[2], &[2])])),
        ("Z2 - Z2", graph(&[cyclic(2), cyclic(2)], &[edge(0, cyclic(1), [0, 1], &[], &[])])),
        ("D6 loop", graph(&[json!({"family": "dihedral", "n": 3})], &[edge(0, cyclic(1), [0, 0], &[], &[])])),
        ("Z3 loop Z3", graph(&[cyclic(3)], &[edge(0, cyclic(3), [0, 0], &[1], &[1])])),
        ("Z3 loop Z3 inverted", graph(&[cyclic(3)], &[edge(0, cyclic(3), [0, 0], &[1], &[2])])),
    ]
}

pub fn targets() -> Vec<&'static str> {
    vec![
        "cyclic:1", "cyclic:2", "cyclic:4", "cyclic:6", "cyclic:12", "cyclic:24", "dihedral:2", "dihedral:3",
        "dihedral:4", "dihedral:6", "dihedral:12", "binary_dihedral:2", "binary_dihedral:3", "binary_dihedral:5",
        "binary_dihedral:6", "polyhedral:tetrahedral", "polyhedral:octahedral", "polyhedral:binary_tetrahedral",
    ]
}

pub fn key(s: &Surjection) -> String {
    serde_json::to_string(&s.image_table()).unwrap()
}

/// Every tuple of generator images, filtered by the definition.
pub fn brute_force(g: &GraphOfGroups, target: &Arc<FiniteGroup>) -> BTreeSet<String> {
    let n = target.order();
    let mut per_vertex: Vec<(VertexId, Vec<Vec<usize>>)> = Vec::new();
    for v in g.vertices() {
        let k = v.group.generators().len();
        let mut homs = Vec::new();
        for code in 0..n.pow(k as u32) {
            let images: Vec<usize> = (0..k).map(|i| code / n.pow(i as u32) % n).collect();
            if GroupHom::new(v.group.clone(), target.clone(), images.clone()).is_ok() {
                homs.push(images);
            }
        }
        per_vertex.push((v.id, homs));
    }
    let tree = g.spanning_tree();
    let letters: Vec<_> = g.edges().iter().map(|e| e.id).filter(|e| !tree.tree_edges.contains(e)).collect();
    let mut out = BTreeSet::new();
    let mut pick = vec![0usize; per_vertex.len() + letters.len()];
    let radix: Vec<usize> = per_vertex.iter().map(|(_, h)| h.len()).chain(letters.iter().map(|_| n)).collect();
    if radix.contains(&0) {
        return out;
    }
    loop {
        let images: BTreeMap<_, _> = per_vertex.iter().zip(&pick).map(|((v, h), &i)| (*v, h[i].clone())).collect();
        let stable: BTreeMap<_, _> = letters.iter().zip(&pick[per_vertex.len()..]).map(|(e, &t)| (*e, t)).collect();
        if let Ok(s) = Surjection::new(g, target.clone(), &images, &stable) {
            if verify_surjection(&s) {
                out.insert(key(&s));
            }
        }
        let mut i = 0;
        loop {
            if i == pick.len() {
                return out;
            }
            pick[i] += 1;
            if pick[i] < radix[i] {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}


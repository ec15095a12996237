//! Random graphs of cyclic groups and fixture loading for integration tests.
#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use handlecalc::admissibility::admissibility_report;
use handlecalc::gog::{genus_from_order, Edge, Vertex};
use handlecalc::groups::{make_cyclic, make_cyclic_rotation};
use handlecalc::homsearch::verify_surjection;
use handlecalc::io::{parse_instance, Instance};
use handlecalc::{EdgeId, FiniteGroup, GraphOfGroups, GroupHom, Surjection, VertexId};
use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixtures() -> Vec<(String, String, Instance)> {
    let mut out = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    for p in paths {
        let text = std::fs::read_to_string(&p).unwrap();
        let inst = parse_instance(&text).unwrap();
        out.push((p.file_name().unwrap().to_string_lossy().into_owned(), text, inst));
    }
    out
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn cyc(cache: &mut BTreeMap<u64, Arc<FiniteGroup>>, n: u64) -> Arc<FiniteGroup> {
    cache.entry(n).or_insert_with(|| Arc::new(make_cyclic(n as u32).unwrap())).clone()
}

/// Random connected multigraph on `1..=max_vertices` vertices: a random tree
/// plus extra edges and loops, at most `max_edges` edges in all.
fn random_shape<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize) -> (usize, Vec<(usize, usize)>) {
    let nv = rng.gen_range(1..=max_vertices.min(max_edges + 1));
    let mut edges: Vec<(usize, usize)> = (1..nv).map(|v| (rng.gen_range(0..v), v)).collect();
    let extra = rng.gen_range(0..=max_edges - edges.len());
    for _ in 0..extra {
        let u = rng.gen_range(0..nv);
        let v = rng.gen_range(0..nv);
        edges.push((u.min(v), u.max(v)));
    }
    edges.shuffle(rng);
    (nv, edges)
}

/// Embedding `Z_e -> Z_m` sending the generator to `k m/e` with `k` a unit.
fn twisted(rng: &mut impl Rng, e: &Arc<FiniteGroup>, m: &Arc<FiniteGroup>) -> GroupHom {
    let (eo, mo) = (e.order(), m.order());
    let images = if eo > 1 {
        let units: Vec<usize> = (1..eo).filter(|k| k.gcd(&eo) == 1).collect();
        vec![units.choose(rng).unwrap() * (mo / eo)]
    } else {
        vec![]
    };
    GroupHom::new(e.clone(), m.clone(), images).unwrap()
}

/// Random graph of cyclic groups, trivial edges and loops included.
pub fn random_cyclic_graph<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize) -> GraphOfGroups {
    let mut cache = BTreeMap::new();
    let n = *[6u64, 8, 12, 24, 30, 60].choose(rng).unwrap();
    let (nv, shape) = random_shape(rng, max_vertices, max_edges);
    let divs = divisors(n);
    let groups: Vec<Arc<FiniteGroup>> = (0..nv).map(|_| cyc(&mut cache, *divs.choose(rng).unwrap())).collect();
    let vertices = groups.iter().enumerate().map(|(i, g)| Vertex { id: VertexId(i as u32), group: g.clone() }).collect();
    let edges = shape
        .iter()
        .enumerate()
        .map(|(k, &(u, v))| {
            let common = (groups[u].order() as u64).gcd(&(groups[v].order() as u64));
            let e = cyc(&mut cache, *divisors(common).choose(rng).unwrap());
            let alpha = twisted(rng, &e, &groups[u]);
            let omega = twisted(rng, &e, &groups[v]);
            Edge { id: EdgeId(k as u32), group: e, ends: (VertexId(u as u32), VertexId(v as u32)), alpha, omega }
        })
        .collect();
    GraphOfGroups::new(vertices, edges).unwrap()
}

/// Random admissible graph of cyclic groups in normal form with a
/// surjection onto `Z_n`, or `None` when the draw fails a requirement.
pub fn random_admissible<R: Rng>(rng: &mut R) -> Option<(GraphOfGroups, Surjection)> {
    let mut cache = BTreeMap::new();
    let n = rng.gen_range(2..=60u64);
    let (nv, shape) = random_shape(rng, 3, 4);
    if shape.is_empty() {
        return None;
    }
    let divs = divisors(n);
    let m: Vec<u64> = (0..nv).map(|_| *divs.choose(rng).unwrap()).collect();
    let e: Vec<u64> = shape.iter().map(|&(u, v)| *divisors(m[u].gcd(&m[v])).choose(rng).unwrap()).collect();
    let mut groups = Vec::new();
    for v in 0..nv {
        let mut ends: Vec<u64> =
            shape.iter().zip(&e).filter(|((a, b), &x)| (*a == v || *b == v) && x > 1).map(|(_, &x)| x).collect();
        ends.sort_unstable();
        ends.dedup();
        let (s, t) = match ends[..] {
            [] => (1, 1),
            [a] => (a, 1),
            [a, b] if a.gcd(&b) == 1 => (a, b),
            _ => return None,
        };
        groups.push(Arc::new(make_cyclic_rotation(m[v] as u32, s as u32, t as u32).ok()?));
    }
    let canonical = |g: &Arc<FiniteGroup>, h: &Arc<FiniteGroup>| {
        let images = if g.order() > 1 { vec![h.order() / g.order()] } else { vec![] };
        GroupHom::new(g.clone(), h.clone(), images).unwrap()
    };
    let vertices = groups.iter().enumerate().map(|(i, g)| Vertex { id: VertexId(i as u32), group: g.clone() }).collect();
    let edges = shape
        .iter()
        .zip(&e)
        .enumerate()
        .map(|(k, (&(u, v), &x))| {
            let g = cyc(&mut cache, x);
            Edge {
                id: EdgeId(k as u32),
                group: g.clone(),
                ends: (VertexId(u as u32), VertexId(v as u32)),
                alpha: canonical(&g, &groups[u]),
                omega: canonical(&g, &groups[v]),
            }
        })
        .collect();
    let graph = GraphOfGroups::new(vertices, edges).ok()?;
    if !graph.is_normal_form() || genus_from_order(&graph, n).is_err() {
        return None;
    }
    let images = (0..nv)
        .map(|v| (VertexId(v as u32), if m[v] > 1 { vec![(n / m[v]) as usize] } else { vec![] }))
        .collect();
    let tree = graph.spanning_tree();
    let stable = graph
        .edges()
        .iter()
        .filter(|x| !tree.tree_edges.contains(&x.id))
        .map(|x| (x.id, rng.gen_range(0..n as usize)))
        .collect();
    let s = Surjection::new(&graph, cyc(&mut cache, n), &images, &stable).ok()?;
    if !verify_surjection(&s) || !admissibility_report(&graph, &BTreeMap::new()).ok()?.admissible {
        return None;
    }
    Some((graph, s))
}

/// `count` admissible instances drawn from a fixed seed.
pub fn admissible_sample(seed: u64, count: usize) -> Vec<(GraphOfGroups, Surjection)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for _ in 0..200_000 {
        if out.len() == count {
            break;
        }
        if let Some(x) = random_admissible(&mut r) {
            out.push(x);
        }
    }
    out
}

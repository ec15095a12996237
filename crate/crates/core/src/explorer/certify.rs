//! Per-instance certificates for the inequalities behind the order bounds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::covering::max_finite_normal_subgroup;
use crate::gog::{euler_characteristic, genus_from_order, reduce_to_normal_form, Edge, GraphOfGroups, Rational};
use crate::groups::{classify_so3_subgroup, So3Class};
use crate::homsearch::Surjection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProofCase {
    /// One edge.
    SingleEdge,
    /// Cyclic target; the chosen edge has a valence-one end.
    IsolatedVertex,
    /// Cyclic target; neither end of the chosen edge has valence one.
    InteriorEdge,
    /// The minimal edge is a loop.
    ClosedEdge,
    /// The minimal edge has index at least 3 at one end.
    IndexAtLeastThree,
    /// The minimal edge has index 2 at both ends.
    DihedralChain,
    OutsideProofCases,
}

fn as_fraction<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn from_fraction<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let text = String::deserialize(d)?;
    text.parse().map_err(|_| serde::de::Error::custom(format!("invalid fraction {text:?}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    #[serde(serialize_with = "as_fraction", deserialize_with = "from_fraction")]
    pub lhs: Rational,
    pub relation: Relation,
    #[serde(serialize_with = "as_fraction", deserialize_with = "from_fraction")]
    pub rhs: Rational,
    pub holds: bool,
}

impl Inequality {
    fn new(name: impl Into<String>, lhs: Rational, relation: Relation, rhs: Rational) -> Self {
        let holds = match relation {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
        };
        Inequality { name: name.into(), lhs, relation, rhs, holds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub genus: Option<u64>,
    pub order: u64,
    pub cyclic: bool,
    pub faithful: bool,
    /// Faithful with a genus of at least 2.
    pub applicable: bool,
    pub case: ProofCase,
    pub inequalities: Vec<Inequality>,
    pub notes: Vec<String>,
}

impl BoundCertificate {
    pub fn all_hold(&self) -> bool {
        self.inequalities.iter().all(|i| i.holds)
    }

    pub fn inequality(&self, name: &str) -> Option<&Inequality> {
        self.inequalities.iter().find(|i| i.name == name)
    }
}

fn int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn frac(p: u64, q: u64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Theorem bound for the class of the target.
pub fn theorem_bound(g: u64, cyclic: bool) -> u64 {
    if cyclic {
        4 * (g.saturating_sub(1)).pow(2)
    } else {
        24 * g * g.saturating_sub(1)
    }
}

/// Evaluates the inequalities of the proof case the instance falls into.
pub fn certify_bounds(graph: &GraphOfGroups, s: &Surjection) -> BoundCertificate {
    let n = s.target().order() as u64;
    let cyclic = s.target().is_cyclic();
    let faithful = max_finite_normal_subgroup(graph).is_trivial();
    let mut cert = BoundCertificate {
        genus: None,
        order: n,
        cyclic,
        faithful,
        applicable: false,
        case: ProofCase::OutsideProofCases,
        inequalities: Vec::new(),
        notes: Vec::new(),
    };
    let g = match genus_from_order(graph, n) {
        Ok(g) => g,
        Err(e) => {
            cert.notes.push(e.to_string());
            return cert;
        }
    };
    cert.genus = Some(g);
    cert.applicable = faithful && g >= 2;
    if !faithful {
        cert.notes.push("not faithful".into());
    }
    let nf = reduce_to_normal_form(graph);
    let minus_chi = -euler_characteristic(&nf);
    let gm1 = int(g.saturating_sub(1));
    let ineqs = &mut cert.inequalities;
    if cyclic {
        cert.case = cyclic_case(&nf, n, &minus_chi, &gm1, ineqs);
        ineqs.push(Inequality::new("n <= 4(g-1)^2", int(n), Relation::Le, int(theorem_bound(g, true))));
    } else {
        cert.case = general_case(&nf, n, g, &minus_chi, &gm1, ineqs, &mut cert.notes);
        ineqs.push(Inequality::new("n <= 24g(g-1)", int(n), Relation::Le, int(theorem_bound(g, false))));
    }
    cert
}

fn chi_at_least(minus_chi: &Rational, q: Rational) -> Inequality {
    Inequality::new(format!("-chi >= {q}"), minus_chi.clone(), Relation::Ge, q)
}

fn order(e: &Edge) -> u64 {
    e.group.order() as u64
}

fn has_leaf_end(g: &GraphOfGroups, e: &Edge) -> bool {
    !e.is_loop() && (g.valence(e.ends.0) == 1 || g.valence(e.ends.1) == 1)
}

fn cyclic_case(nf: &GraphOfGroups, n: u64, minus_chi: &Rational, gm1: &Rational, ineqs: &mut Vec<Inequality>) -> ProofCase {
    let edges = nf.edges();
    if edges.len() == 1 {
        ineqs.push(Inequality::new("a <= 1", int(order(&edges[0])), Relation::Le, Rational::one()));
        ineqs.push(chi_at_least(minus_chi, frac(1, 6)));
        ineqs.push(Inequality::new("n <= 6(g-1)", int(n), Relation::Le, int(6) * gm1));
        return ProofCase::SingleEdge;
    }
    // Adjacent pair of coprime edge orders with the smallest minimum.
    let mut best: Option<(u64, u64, usize)> = None;
    for (i, e) in edges.iter().enumerate() {
        for f in edges.iter() {
            if e.id == f.id {
                continue;
            }
            let adjacent = [e.ends.0, e.ends.1].iter().any(|v| *v == f.ends.0 || *v == f.ends.1);
            let (a, b) = (order(e), order(f));
            if adjacent && a.gcd(&b) == 1 && a <= b && best.is_none_or(|(x, y, _)| (a, b) < (x, y)) {
                best = Some((a, b, i));
            }
        }
    }
    let Some((a, b, i)) = best else {
        return ProofCase::OutsideProofCases;
    };
    ineqs.push(Inequality::new("ab <= n", int(a * b), Relation::Le, int(n)));
    ineqs.push(Inequality::new("a^2 <= n", int(a * a), Relation::Le, int(n)));
    if has_leaf_end(nf, &edges[i]) {
        ineqs.push(chi_at_least(minus_chi, frac(1, 2 * a)));
        ineqs.push(Inequality::new("n <= 4(g-1)^2", int(n), Relation::Le, int(4) * gm1 * gm1));
        ProofCase::IsolatedVertex
    } else {
        ineqs.push(chi_at_least(minus_chi, frac(1, a)));
        ineqs.push(Inequality::new("n <= (g-1)^2", int(n), Relation::Le, gm1 * gm1));
        ProofCase::InteriorEdge
    }
}

fn general_case(
    nf: &GraphOfGroups,
    n: u64,
    g: u64,
    minus_chi: &Rational,
    gm1: &Rational,
    ineqs: &mut Vec<Inequality>,
    notes: &mut Vec<String>,
) -> ProofCase {
    let edges = nf.edges();
    if edges.len() == 1 && order(&edges[0]) <= 60 {
        ineqs.push(Inequality::new("|G_e| <= 60", int(order(&edges[0])), Relation::Le, int(60)));
        ineqs.push(chi_at_least(minus_chi, frac(1, 360)));
        ineqs.push(Inequality::new("n <= 360(g-1)", int(n), Relation::Le, int(360) * gm1));
        return ProofCase::SingleEdge;
    }
    let classes: Vec<So3Class> = edges.iter().map(|e| classify_so3_subgroup(&e.group)).collect();
    if classes.iter().any(|c| c.cyclic_part().is_none()) {
        notes.push("an edge group is not cyclic or dihedral".into());
        return ProofCase::OutsideProofCases;
    }
    let i = (0..edges.len()).min_by_key(|&i| (order(&edges[i]), edges[i].id)).unwrap();
    let e = &edges[i];
    let b = order(e);
    let a = classes[i].cyclic_part().unwrap() as u64;
    ineqs.push(Inequality::new("a <= 2g", int(a), Relation::Le, int(2 * g)));
    ineqs.push(Inequality::new("b <= 2a", int(b), Relation::Le, int(2 * a)));
    let index = frac(n, b);
    let at = |v| (nf.vertex(v).unwrap().group.order() as u64) / b;
    let case = if e.is_loop() {
        ineqs.push(chi_at_least(minus_chi, frac(1, b)));
        ineqs.push(Inequality::new("n/b <= g-1", index.clone(), Relation::Le, gm1.clone()));
        ProofCase::ClosedEdge
    } else if at(e.ends.0) >= 3 || at(e.ends.1) >= 3 {
        ineqs.push(chi_at_least(minus_chi, frac(1, 6 * b)));
        ineqs.push(Inequality::new("n/b <= 6(g-1)", index.clone(), Relation::Le, int(6) * gm1));
        ProofCase::IndexAtLeastThree
    } else {
        ineqs.push(chi_at_least(minus_chi, frac(1, 2 * b)));
        ineqs.push(Inequality::new("n/b <= 2(g-1)", index.clone(), Relation::Le, int(2) * gm1));
        ProofCase::DihedralChain
    };
    if minus_chi.is_zero() {
        notes.push("euler characteristic is zero".into());
    }
    case
}

//! Finite groups as Cayley tables with a faithful permutation representation.
//!
//! Every group keeps the identity at index 0. Elements are indices into the
//! multiplication table; `mul(a, b)` is the composition "first `b`, then `a`",
//! matching composition of the underlying permutations.

mod classify;
mod hom;
mod lattice;
mod quaternion;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use fixedbitset::FixedBitSet;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classify::{classify_so3_subgroup, So3Class};
pub use hom::{enumerate_monomorphisms, first_monomorphism, is_isomorphic, monomorphisms_extending, GroupHom};
pub use lattice::{
    conjugate_set, conjugating_element, is_normal, normal_core, subgroup_lattice, Subgroup, DEFAULT_LATTICE_CAP,
};
pub use quaternion::{QuatPair, Quaternion, QUAT_TOL};

/// Structural family a group was built as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Cyclic(u32),
    /// Dihedral group of order `2n`.
    Dihedral(u32),
    Tetrahedral,
    Octahedral,
    Icosahedral,
    /// Binary dihedral group of order `4n`.
    BinaryDihedral(u32),
    BinaryTetrahedral,
    BinaryOctahedral,
    BinaryIcosahedral,
    CentralProduct,
    Generic,
}

impl Family {
    pub fn is_binary(self) -> bool {
        matches!(
            self,
            Family::BinaryDihedral(_)
                | Family::BinaryTetrahedral
                | Family::BinaryOctahedral
                | Family::BinaryIcosahedral
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Cyclic(n) => write!(f, "Z_{n}"),
            Family::Dihedral(n) => write!(f, "D_{}", 2 * n),
            Family::Tetrahedral => write!(f, "A_4"),
            Family::Octahedral => write!(f, "S_4"),
            Family::Icosahedral => write!(f, "A_5"),
            Family::BinaryDihedral(n) => write!(f, "D*_{}", 4 * n),
            Family::BinaryTetrahedral => write!(f, "T*"),
            Family::BinaryOctahedral => write!(f, "O*"),
            Family::BinaryIcosahedral => write!(f, "I*"),
            Family::CentralProduct => write!(f, "central product"),
            Family::Generic => write!(f, "generic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyhedralKind {
    Tetrahedral,
    Octahedral,
    Icosahedral,
    BinaryTetrahedral,
    BinaryOctahedral,
    BinaryIcosahedral,
}

/// Group literal as it appears in instance documents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic {
        n: u32,
        /// Rotation parameters `(s, t)`: the generator acts on `C^2` by
        /// `(e^{2 pi i s/n}, e^{2 pi i t/n})`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotation: Option<[u32; 2]>,
    },
    Dihedral {
        n: u32,
    },
    BinaryDihedral {
        n: u32,
    },
    CentralProduct {
        left: Box<GroupSpec>,
        right: Box<GroupSpec>,
    },
    Polyhedral {
        kind: PolyhedralKind,
    },
    Table {
        rows: Vec<Vec<u32>>,
    },
    Subgroup {
        of: Box<GroupSpec>,
        generators: Vec<u32>,
    },
}

impl GroupSpec {
    pub fn build(&self) -> Result<FiniteGroup> {
        match self {
            GroupSpec::Cyclic { n, rotation: None } => make_cyclic(*n),
            GroupSpec::Cyclic { n, rotation: Some([s, t]) } => make_cyclic_rotation(*n, *s, *t),
            GroupSpec::Dihedral { n } => make_dihedral(*n),
            GroupSpec::BinaryDihedral { n } => make_binary_dihedral(*n),
            GroupSpec::CentralProduct { left, right } => {
                make_central_product(&left.build()?, &right.build()?)
            }
            GroupSpec::Polyhedral { kind } => Ok(make_polyhedral(*kind)),
            GroupSpec::Table { rows } => FiniteGroup::from_table(rows),
            GroupSpec::Subgroup { of, generators } => {
                let parent = of.build()?;
                for &g in generators {
                    if g as usize >= parent.order() {
                        return Err(Error::InvalidGroup(format!(
                            "subgroup generator {g} out of range for a group of order {}",
                            parent.order()
                        )));
                    }
                }
                let gens: Vec<usize> = generators.iter().map(|&g| g as usize).collect();
                Ok(parent.subgroup_group(&gens))
            }
        }
    }
}

#[derive(Debug, Clone)]
struct PermRep {
    degree: usize,
    images: Vec<u32>,
}

/// A finite group given by its full multiplication table.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    spec: GroupSpec,
    family: Family,
    n: usize,
    table: Vec<u32>,
    inverse: Vec<u32>,
    orders: Vec<u32>,
    generators: Vec<usize>,
    central: Option<usize>,
    perm_rep: Option<PermRep>,
    realization: Option<Vec<QuatPair>>,
    words: OnceLock<CayleyPresentation>,
}

/// A letter of a word in the group's generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

pub type Word = Vec<Letter>;

/// Generator words for every element plus a complete set of relators, read
/// off a spanning tree of the left Cayley graph.
#[derive(Debug, Clone)]
pub struct CayleyPresentation {
    pub words: Vec<Word>,
    pub relators: Vec<Word>,
}

impl FiniteGroup {
    fn from_raw_table(spec: GroupSpec, family: Family, n: usize, table: Vec<u32>) -> Self {
        let mut inverse = vec![0u32; n];
        for a in 0..n {
            for b in 0..n {
                if table[a * n + b] == 0 {
                    inverse[a] = b as u32;
                    break;
                }
            }
        }
        let mut orders = vec![0u32; n];
        for a in 0..n {
            let mut x = a;
            let mut k = 1;
            while x != 0 {
                x = table[a * n + x] as usize;
                k += 1;
            }
            orders[a] = k;
        }
        let mut group = FiniteGroup {
            spec,
            family,
            n,
            table,
            inverse,
            orders,
            generators: Vec::new(),
            central: None,
            perm_rep: None,
            realization: None,
            words: OnceLock::new(),
        };
        group.generators = group.greedy_generators();
        group
    }

    /// Builds a group from explicit rows of a multiplication table. Row 0
    /// must be the identity.
    pub fn from_table(rows: &[Vec<u32>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty multiplication table".into()));
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroup(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            let mut seen = FixedBitSet::with_capacity(n);
            for &v in row {
                if v as usize >= n || seen.put(v as usize) {
                    return Err(Error::InvalidGroup(format!("row {i} is not a permutation of 0..{n}")));
                }
            }
            table.extend_from_slice(row);
        }
        for j in 0..n {
            if table[j] != j as u32 || table[j * n] != j as u32 {
                return Err(Error::InvalidGroup("element 0 must be the identity".into()));
            }
            let mut seen = FixedBitSet::with_capacity(n);
            for i in 0..n {
                if seen.put(table[i * n + j] as usize) {
                    return Err(Error::InvalidGroup(format!("column {j} repeats an element")));
                }
            }
        }
        let spec = GroupSpec::Table { rows: rows.to_vec() };
        let group = FiniteGroup::from_raw_table(spec, Family::Generic, n, table);
        if !group.verify_axioms() {
            return Err(Error::InvalidGroup("multiplication table is not associative".into()));
        }
        Ok(group)
    }

    /// Builds a group from the full list of its elements as permutations;
    /// `elements[0]` must be the identity.
    fn from_permutations(spec: GroupSpec, family: Family, degree: usize, elements: Vec<Vec<u32>>) -> Self {
        let n = elements.len();
        let index: HashMap<&[u32], u32> =
            elements.iter().enumerate().map(|(i, p)| (p.as_slice(), i as u32)).collect();
        let mut table = vec![0u32; n * n];
        let mut buf = vec![0u32; degree];
        for a in 0..n {
            for b in 0..n {
                for (x, slot) in buf.iter_mut().enumerate() {
                    *slot = elements[a][elements[b][x] as usize];
                }
                table[a * n + b] = index[buf.as_slice()];
            }
        }
        let mut group = FiniteGroup::from_raw_table(spec, family, n, table);
        group.perm_rep = Some(PermRep { degree, images: elements.concat() });
        group
    }

    /// Closure of a set of permutation generators.
    fn from_permutation_generators(spec: GroupSpec, family: Family, degree: usize, gens: &[Vec<u32>]) -> Self {
        let identity: Vec<u32> = (0..degree as u32).collect();
        let mut elements = vec![identity.clone()];
        let mut seen: HashMap<Vec<u32>, usize> = HashMap::from([(identity, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in gens {
                let next: Vec<u32> = (0..degree).map(|x| g[elements[i][x] as usize]).collect();
                if !seen.contains_key(&next) {
                    seen.insert(next.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(next);
                }
            }
        }
        FiniteGroup::from_permutations(spec, family, degree, elements)
    }

    /// Closure of quaternion-pair generators inside `S^3 x S^3` (not modulo
    /// sign). The permutation representation is the left regular one.
    fn from_quaternion_generators(spec: GroupSpec, family: Family, gens: &[QuatPair]) -> Self {
        let mut elements = vec![QuatPair::IDENTITY];
        let key = |p: &QuatPair| (p.left.grid_key(), p.right.grid_key());
        let mut seen = HashMap::from([(key(&QuatPair::IDENTITY), 0u32)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in gens {
                let next = g.compose(&elements[i]);
                let k = key(&next);
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(k) {
                    e.insert(elements.len() as u32);
                    queue.push_back(elements.len());
                    elements.push(next);
                }
            }
        }
        let n = elements.len();
        let mut table = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                table[a * n + b] = seen[&key(&elements[a].compose(&elements[b]))];
            }
        }
        let mut group = FiniteGroup::from_raw_table(spec, family, n, table);
        group.realization = Some(elements);
        group
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    /// `g a g^-1`
    #[inline]
    pub fn conj(&self, g: usize, a: usize) -> usize {
        self.mul(self.mul(g, a), self.inv(g))
    }

    pub fn pow(&self, a: usize, k: u64) -> usize {
        let k = k % self.orders[a] as u64;
        (0..k).fold(0, |acc, _| self.mul(a, acc))
    }

    pub fn element_order(&self, a: usize) -> u32 {
        self.orders[a]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Distinguished central element of order 2, if any.
    pub fn central(&self) -> Option<usize> {
        self.central
    }

    pub fn realization(&self) -> Option<&[QuatPair]> {
        self.realization.as_deref()
    }

    pub fn degree(&self) -> usize {
        self.perm_rep.as_ref().map_or(self.n, |p| p.degree)
    }

    /// The permutation realizing element `a`.
    pub fn permutation(&self, a: usize) -> Vec<u32> {
        match &self.perm_rep {
            Some(p) => p.images[a * p.degree..(a + 1) * p.degree].to_vec(),
            None => self.table[a * self.n..(a + 1) * self.n].to_vec(),
        }
    }

    pub fn is_abelian(&self) -> bool {
        let g = &self.generators;
        g.iter().all(|&a| g.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn is_cyclic(&self) -> bool {
        self.orders.iter().any(|&o| o as usize == self.n)
    }

    pub fn order_histogram(&self) -> BTreeMap<u32, usize> {
        let mut h = BTreeMap::new();
        for &o in &self.orders {
            *h.entry(o).or_insert(0) += 1;
        }
        h
    }

    /// Elements of the subgroup generated by `gens`.
    pub fn generated(&self, gens: &[usize]) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.n);
        set.insert(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(g, x);
                if !set.put(y) {
                    queue.push_back(y);
                }
            }
        }
        set
    }

    /// Smallest-first greedy generating set, preferring elements of large
    /// order so presentations stay short.
    fn greedy_generators(&self) -> Vec<usize> {
        let mut candidates: Vec<usize> = (1..self.n).collect();
        candidates.sort_by_key(|&a| (std::cmp::Reverse(self.orders[a]), a));
        let mut gens = Vec::new();
        let mut current = self.generated(&[]);
        for a in candidates {
            if current.count_ones(..) == self.n {
                break;
            }
            if !current.contains(a) {
                gens.push(a);
                current = self.generated(&gens);
            }
        }
        gens
    }

    /// Replaces the generating set; must generate the whole group.
    fn with_generators(mut self, gens: Vec<usize>) -> Self {
        debug_assert_eq!(self.generated(&gens).count_ones(..), self.n);
        self.generators = gens;
        self.words = OnceLock::new();
        self
    }

    /// Group axioms via Light's associativity test on the generating set;
    /// closure, identity and inverses hold by construction of the table.
    pub fn verify_axioms(&self) -> bool {
        let n = self.n;
        if self.table.len() != n * n || (0..n).any(|a| self.mul(0, a) != a || self.mul(a, 0) != a) {
            return false;
        }
        if (0..n).any(|a| self.mul(a, self.inv(a)) != 0 || self.mul(self.inv(a), a) != 0) {
            return false;
        }
        let mut reached = FixedBitSet::with_capacity(n);
        reached.insert(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in &self.generators {
                let y = self.mul(g, x);
                if !reached.put(y) {
                    queue.push_back(y);
                }
            }
        }
        if reached.count_ones(..) != n {
            return false;
        }
        self.generators.iter().all(|&s| {
            (0..n).all(|x| (0..n).all(|y| self.mul(self.mul(x, s), y) == self.mul(x, self.mul(s, y))))
        })
    }

    /// Checks that the permutation representation is a faithful homomorphism.
    pub fn verify_permutations(&self) -> bool {
        let d = self.degree();
        let perms: Vec<Vec<u32>> = (0..self.n).map(|a| self.permutation(a)).collect();
        let faithful = (1..self.n).all(|a| (0..d).any(|x| perms[a][x] != x as u32));
        faithful
            && self.generators.iter().all(|&a| {
                (0..self.n).all(|b| {
                    let ab = self.mul(a, b);
                    (0..d).all(|x| perms[ab][x] == perms[a][perms[b][x] as usize])
                })
            })
    }

    /// Checks that the quaternion realization is a faithful homomorphism to SO(4).
    pub fn verify_realization(&self) -> bool {
        let Some(r) = &self.realization else { return false };
        let faithful = (1..self.n).all(|a| !r[a].same_rotation(&QuatPair::IDENTITY));
        faithful
            && (0..self.n).all(|a| {
                self.generators.iter().all(|&s| r[self.mul(s, a)].same_rotation(&r[s].compose(&r[a])))
            })
    }

    pub fn presentation(&self) -> &CayleyPresentation {
        self.words.get_or_init(|| {
            let n = self.n;
            let mut words: Vec<Option<Word>> = vec![None; n];
            words[0] = Some(Vec::new());
            let mut queue = VecDeque::from([0usize]);
            let mut tree_edges = FixedBitSet::with_capacity(n * self.generators.len().max(1));
            while let Some(x) = queue.pop_front() {
                for (gi, &g) in self.generators.iter().enumerate() {
                    let y = self.mul(g, x);
                    if words[y].is_none() {
                        let mut w = vec![Letter { generator: gi, inverse: false }];
                        w.extend_from_slice(words[x].as_ref().unwrap());
                        words[y] = Some(w);
                        tree_edges.insert(x * self.generators.len() + gi);
                        queue.push_back(y);
                    }
                }
            }
            let words: Vec<Word> = words.into_iter().map(Option::unwrap).collect();
            let mut relators = Vec::new();
            for x in 0..n {
                for (gi, &g) in self.generators.iter().enumerate() {
                    if tree_edges.contains(x * self.generators.len() + gi) {
                        continue;
                    }
                    let y = self.mul(g, x);
                    let mut r = vec![Letter { generator: gi, inverse: false }];
                    r.extend_from_slice(&words[x]);
                    r.extend(invert_word(&words[y]));
                    relators.push(r);
                }
            }
            CayleyPresentation { words, relators }
        })
    }

    /// Word for element `a` in the group's generators.
    pub fn word(&self, a: usize) -> &Word {
        &self.presentation().words[a]
    }

    /// The subgroup generated by `gens` as a group in its own right, with
    /// the given generators first in its element order.
    pub fn subgroup_group(&self, gens: &[usize]) -> FiniteGroup {
        let (group, _) = self.subgroup_with_embedding(gens);
        group
    }

    /// Like [`Self::subgroup_group`], also returning the index in `self` of
    /// each element of the subgroup.
    pub fn subgroup_with_embedding(&self, gens: &[usize]) -> (FiniteGroup, Vec<u32>) {
        let gens: Vec<usize> = gens.iter().copied().filter(|&g| g != 0).collect();
        let mut elems = vec![0usize];
        let mut local: HashMap<usize, u32> = HashMap::from([(0, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for &g in &gens {
                let y = self.mul(g, elems[i]);
                if let std::collections::hash_map::Entry::Vacant(e) = local.entry(y) {
                    e.insert(elems.len() as u32);
                    queue.push_back(elems.len());
                    elems.push(y);
                }
            }
        }
        let m = elems.len();
        let mut table = vec![0u32; m * m];
        for a in 0..m {
            for b in 0..m {
                table[a * m + b] = local[&self.mul(elems[a], elems[b])];
            }
        }
        let spec = GroupSpec::Subgroup {
            of: Box::new(self.spec.clone()),
            generators: gens.iter().map(|&g| g as u32).collect(),
        };
        let mut group = FiniteGroup::from_raw_table(spec, Family::Generic, m, table);
        let local_gens: Vec<usize> = {
            let mut seen = Vec::new();
            for &g in &gens {
                let l = local[&g] as usize;
                if !seen.contains(&l) {
                    seen.push(l);
                }
            }
            seen
        };
        if !local_gens.is_empty() {
            let gens = minimal_prefix_generators(&group, &local_gens);
            group = group.with_generators(gens);
        }
        group.central = self.central.and_then(|z| local.get(&z).map(|&l| l as usize));
        if let Some(r) = &self.realization {
            group.realization = Some(elems.iter().map(|&e| r[e]).collect());
        }
        if let Some(p) = &self.perm_rep {
            let images = elems.iter().flat_map(|&e| p.images[e * p.degree..(e + 1) * p.degree].iter().copied()).collect();
            group.perm_rep = Some(PermRep { degree: p.degree, images });
        }
        (group, elems.into_iter().map(|e| e as u32).collect())
    }
}

/// Drops generators already contained in the span of the earlier ones.
fn minimal_prefix_generators(group: &FiniteGroup, gens: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for &g in gens {
        if !group.generated(&out).contains(g) {
            out.push(g);
        }
    }
    out
}

pub fn invert_word(w: &[Letter]) -> impl Iterator<Item = Letter> + '_ {
    w.iter().rev().map(|l| Letter { generator: l.generator, inverse: !l.inverse })
}

/// Cyclic group of order `n` acting on `n` points by rotation.
pub fn make_cyclic(n: u32) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::InvalidGroup("cyclic group order must be positive".into()));
    }
    let m = n as usize;
    let elements: Vec<Vec<u32>> = (0..m).map(|k| (0..m).map(|x| ((x + k) % m) as u32).collect()).collect();
    let spec = GroupSpec::Cyclic { n, rotation: None };
    let mut g = FiniteGroup::from_permutations(spec, Family::Cyclic(n), m, elements);
    g = g.with_generators(if n > 1 { vec![1] } else { vec![] });
    if n.is_multiple_of(2) {
        g.central = Some(m / 2);
    }
    Ok(g)
}

/// Cyclic group of order `m` whose generator acts on `S^3 ⊂ C^2` by
/// `(z1, z2) -> (e^{2 pi i s/m} z1, e^{2 pi i t/m} z2)`.
pub fn make_cyclic_rotation(m: u32, s: u32, t: u32) -> Result<FiniteGroup> {
    let mut g = make_cyclic(m)?;
    if s.gcd(&t).gcd(&m) != 1 {
        return Err(Error::InvalidGroup(format!(
            "rotation ({s}, {t}) of Z_{m} is not faithful: gcd(s, t, m) != 1"
        )));
    }
    let realization = (0..m)
        .map(|k| {
            let theta1 = 2.0 * std::f64::consts::PI * ((k as u64 * s as u64) % m as u64) as f64 / m as f64;
            let theta2 = 2.0 * std::f64::consts::PI * ((k as u64 * t as u64) % m as u64) as f64 / m as f64;
            let alpha = (theta1 + theta2) / 2.0;
            let beta = (theta1 - theta2) / 2.0;
            QuatPair::new(Quaternion::exp_i(-alpha), Quaternion::exp_i(beta))
        })
        .collect();
    g.realization = Some(realization);
    g.spec = GroupSpec::Cyclic { n: m, rotation: Some([s % m.max(1), t % m.max(1)]) };
    Ok(g)
}

/// Dihedral group `D_2n` of order `2n`: element `k` is `r^k`, element `n + k`
/// is `r^k s`.
pub fn make_dihedral(n: u32) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::InvalidGroup("dihedral parameter must be positive".into()));
    }
    let m = n as usize;
    let order = 2 * m;
    let idx = |k: usize, e: usize| e * m + k % m;
    let mut table = vec![0u32; order * order];
    for a in 0..order {
        let (k1, e1) = (a % m, a / m);
        for b in 0..order {
            let (k2, e2) = (b % m, b / m);
            let k = if e1 == 0 { k1 + k2 } else { k1 + m - k2 };
            table[a * order + b] = idx(k, (e1 + e2) % 2) as u32;
        }
    }
    let spec = GroupSpec::Dihedral { n };
    let mut g = FiniteGroup::from_raw_table(spec, Family::Dihedral(n), order, table);
    g = g.with_generators(if m > 1 { vec![1, m] } else { vec![m] });
    if m >= 3 {
        let images = (0..order)
            .flat_map(|a| {
                let (k, e) = (a % m, a / m);
                (0..m).map(move |x| if e == 0 { ((x + k) % m) as u32 } else { ((k + m - x) % m) as u32 })
            })
            .collect();
        g.perm_rep = Some(PermRep { degree: m, images });
    }
    Ok(g)
}

fn binary_dihedral_generators(n: u32) -> Vec<QuatPair> {
    let a = Quaternion::exp_i(std::f64::consts::PI / n as f64);
    vec![QuatPair::new(a, Quaternion::ONE), QuatPair::new(Quaternion::J, Quaternion::ONE)]
}

fn mark_minus_one(mut g: FiniteGroup) -> FiniteGroup {
    let minus = g
        .realization
        .as_ref()
        .and_then(|r| r.iter().position(|p| p.left.approx_eq(-Quaternion::ONE) && p.right.approx_eq(Quaternion::ONE)));
    g.central = minus;
    g
}

/// Binary dihedral group `D*_4n` of order `4n`, generated by `e^{i pi/n}` and `j`.
pub fn make_binary_dihedral(n: u32) -> Result<FiniteGroup> {
    if n < 2 {
        return Err(Error::InvalidGroup(format!("binary dihedral parameter must be at least 2, got {n}")));
    }
    let spec = GroupSpec::BinaryDihedral { n };
    let g = FiniteGroup::from_quaternion_generators(spec, Family::BinaryDihedral(n), &binary_dihedral_generators(n));
    Ok(mark_minus_one(g).with_generators(vec![1, 2]))
}

fn perm_from_cycles(degree: usize, cycles: &[&[u32]]) -> Vec<u32> {
    let mut p: Vec<u32> = (0..degree as u32).collect();
    for c in cycles {
        for (i, &x) in c.iter().enumerate() {
            p[x as usize] = c[(i + 1) % c.len()];
        }
    }
    p
}

pub fn make_polyhedral(kind: PolyhedralKind) -> FiniteGroup {
    let spec = GroupSpec::Polyhedral { kind };
    let half = 0.5;
    let s = QuatPair::new(Quaternion::new(half, half, half, half), Quaternion::ONE);
    match kind {
        PolyhedralKind::Tetrahedral => FiniteGroup::from_permutation_generators(
            spec,
            Family::Tetrahedral,
            4,
            &[perm_from_cycles(4, &[&[0, 1, 2]]), perm_from_cycles(4, &[&[0, 1], &[2, 3]])],
        ),
        PolyhedralKind::Octahedral => FiniteGroup::from_permutation_generators(
            spec,
            Family::Octahedral,
            4,
            &[perm_from_cycles(4, &[&[0, 1, 2, 3]]), perm_from_cycles(4, &[&[0, 1]])],
        ),
        PolyhedralKind::Icosahedral => FiniteGroup::from_permutation_generators(
            spec,
            Family::Icosahedral,
            5,
            &[perm_from_cycles(5, &[&[0, 1, 2, 3, 4]]), perm_from_cycles(5, &[&[0, 1, 2]])],
        ),
        PolyhedralKind::BinaryTetrahedral => {
            let gens = [s, QuatPair::new(Quaternion::I, Quaternion::ONE)];
            mark_minus_one(FiniteGroup::from_quaternion_generators(spec, Family::BinaryTetrahedral, &gens))
        }
        PolyhedralKind::BinaryOctahedral => {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let gens = [s, QuatPair::new(Quaternion::new(r, r, 0.0, 0.0), Quaternion::ONE)];
            mark_minus_one(FiniteGroup::from_quaternion_generators(spec, Family::BinaryOctahedral, &gens))
        }
        PolyhedralKind::BinaryIcosahedral => {
            let phi = (1.0 + 5f64.sqrt()) / 2.0;
            let t = Quaternion::new(phi / 2.0, 1.0 / (2.0 * phi), 0.5, 0.0);
            let gens = [s, QuatPair::new(t, Quaternion::ONE)];
            mark_minus_one(FiniteGroup::from_quaternion_generators(spec, Family::BinaryIcosahedral, &gens))
        }
    }
}

/// Central product `(G1 x G2) / <(z1, z2)>` over the distinguished central
/// involutions. Element `(a, b)` is stored under the smaller of the index
/// pairs `(a, b)`, `(a z1, b z2)`.
pub fn make_central_product(g1: &FiniteGroup, g2: &FiniteGroup) -> Result<FiniteGroup> {
    let z1 = g1
        .central
        .ok_or_else(|| Error::InvalidGroup("left factor has no distinguished central element".into()))?;
    let z2 = g2
        .central
        .ok_or_else(|| Error::InvalidGroup("right factor has no distinguished central element".into()))?;
    let (n1, n2) = (g1.order(), g2.order());
    let canon = |a: usize, b: usize| -> (usize, usize) { (a, b).min((g1.mul(a, z1), g2.mul(b, z2))) };
    let mut pairs = Vec::with_capacity(n1 * n2 / 2);
    let mut index = vec![u32::MAX; n1 * n2];
    for a in 0..n1 {
        for b in 0..n2 {
            let c = canon(a, b);
            if c == (a, b) {
                index[a * n2 + b] = pairs.len() as u32;
                pairs.push(c);
            }
        }
    }
    for a in 0..n1 {
        for b in 0..n2 {
            let (ca, cb) = canon(a, b);
            index[a * n2 + b] = index[ca * n2 + cb];
        }
    }
    let m = pairs.len();
    let mut table = vec![0u32; m * m];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        for (j, &(c, d)) in pairs.iter().enumerate() {
            table[i * m + j] = index[g1.mul(a, c) * n2 + g2.mul(b, d)];
        }
    }
    let spec = GroupSpec::CentralProduct { left: Box::new(g1.spec.clone()), right: Box::new(g2.spec.clone()) };
    let mut g = FiniteGroup::from_raw_table(spec, Family::CentralProduct, m, table);
    let mut gens: Vec<usize> = g1.generators.iter().map(|&s| index[s * n2] as usize).collect();
    gens.extend(g2.generators.iter().map(|&t| index[t] as usize));
    gens.retain(|&x| x != 0);
    let gens = minimal_prefix_generators(&g, &gens);
    g = g.with_generators(gens);
    if m > 1 {
        g.central = Some(index[z1 * n2] as usize);
    }
    let left_unit = |r: &[QuatPair]| r.iter().all(|p| p.right.approx_eq(Quaternion::ONE));
    if let (Some(r1), Some(r2)) = (&g1.realization, &g2.realization) {
        let z_ok = r1[z1].left.approx_eq(-Quaternion::ONE) && r2[z2].left.approx_eq(-Quaternion::ONE);
        if left_unit(r1) && left_unit(r2) && z_ok {
            g.realization = Some(pairs.iter().map(|&(a, b)| QuatPair::new(r1[a].left, r2[b].left)).collect());
        }
    }
    Ok(g)
}

/// Index of the class of `(a, b)` in a central product built from `g1`, `g2`.
pub fn central_product_index(product: &FiniteGroup, g1: &FiniteGroup, g2: &FiniteGroup, a: usize, b: usize) -> usize {
    // Recomputed from the generators; cheap for the orders involved.
    let (z1, z2) = (g1.central.unwrap(), g2.central.unwrap());
    let target = (a, b).min((g1.mul(a, z1), g2.mul(b, z2)));
    let mut k = 0;
    for x in 0..g1.order() {
        for y in 0..g2.order() {
            let c = (x, y).min((g1.mul(x, z1), g2.mul(y, z2)));
            if c == (x, y) {
                if c == target {
                    debug_assert!(k < product.order());
                    return k;
                }
                k += 1;
            }
        }
    }
    unreachable!("pair out of range")
}

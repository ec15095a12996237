//! Whether a graph of groups can come from a handle orbifold: vertex groups
//! acting orthogonally on `S^3`, edge groups in `SO(3)`, and every edge group
//! equal to a point stabilizer of the vertex action at its end.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gog::{EdgeId, GraphOfGroups, VertexId};
use crate::groups::{
    classify_so3_subgroup, conjugating_element, Family, FiniteGroup, GroupSpec, Quaternion, So3Class, QUAT_TOL,
};

/// Rotation type `(s, t)` of a cyclic group `Z_m` acting on `S^3 ⊂ C^2` by
/// `(z1, z2) -> (e^{2 pi i s/m} z1, e^{2 pi i t/m} z2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CyclicRotationType {
    m: u32,
    s: u32,
    t: u32,
}

impl CyclicRotationType {
    pub fn new(m: u32, s: u32, t: u32) -> Result<Self> {
        if m == 0 || s.gcd(&t).gcd(&m) != 1 {
            return Err(Error::InvalidGroup(format!(
                "rotation type ({s}, {t}) of Z_{m} is not faithful: gcd(s, t, m) != 1"
            )));
        }
        Ok(CyclicRotationType { m, s: s % m, t: t % m })
    }

    /// The rotation type recorded in a group's spec, if any.
    pub fn of_group(group: &FiniteGroup) -> Option<Self> {
        match group.spec() {
            GroupSpec::Cyclic { n, rotation: Some([s, t]) } => Self::new(*n, *s, *t).ok(),
            _ => None,
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// Order of the stabilizer of the circle `z2 = 0`.
    pub fn a(&self) -> u32 {
        self.m.gcd(&self.s)
    }

    /// Order of the stabilizer of the circle `z1 = 0`.
    pub fn b(&self) -> u32 {
        self.m.gcd(&self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilizerKind {
    Circle,
    IsolatedPoint,
    Free,
}

impl fmt::Display for StabilizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilizerKind::Circle => "circle",
            StabilizerKind::IsolatedPoint => "isolated-point",
            StabilizerKind::Free => "free",
        })
    }
}

/// A point stabilizer offered by a vertex action, as element indices of the
/// vertex group, with an optional sample point it fixes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MenuEntry {
    pub subgroup: Vec<usize>,
    pub kind: StabilizerKind,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "witness_array")]
    pub witness: Option<Quaternion>,
}

mod witness_array {
    use super::Quaternion;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(w: &Option<Quaternion>, s: S) -> Result<S::Ok, S::Error> {
        w.map(|q| q.to_array()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Quaternion>, D::Error> {
        Ok(Option::<[f64; 4]>::deserialize(d)?.map(Quaternion::from_array))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MenuSource {
    /// Supplied with the instance; entries with witnesses are certified.
    Declared,
    /// Derived from a cyclic rotation type.
    CyclicRotation,
    /// Computed from the fixed subspaces of a quaternion realization.
    Automatic,
    /// The trivial group acts freely.
    Trivial,
}

impl fmt::Display for MenuSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MenuSource::Declared => "declared, witness-checked",
            MenuSource::CyclicRotation => "rotation type",
            MenuSource::Automatic => "computed from realization",
            MenuSource::Trivial => "trivial group",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizerMenu {
    pub vertex: VertexId,
    pub source: MenuSource,
    pub entries: Vec<MenuEntry>,
}

fn multiples(m: u32, order: u32) -> Vec<usize> {
    let step = (m / order) as usize;
    (0..order as usize).map(|k| k * step).collect()
}

/// Menu of a cyclic rotation action: the two axis circles with stabilizers
/// `Z_a`, `Z_b` and the free orbits. Trivial circle stabilizers merge into
/// the free entry.
pub fn cyclic_stabilizer_menu(vertex: VertexId, rt: &CyclicRotationType) -> StabilizerMenu {
    let mut entries = Vec::new();
    if rt.a() > 1 {
        entries.push(MenuEntry {
            subgroup: multiples(rt.m, rt.a()),
            kind: StabilizerKind::Circle,
            witness: Some(Quaternion::ONE),
        });
    }
    if rt.b() > 1 {
        entries.push(MenuEntry {
            subgroup: multiples(rt.m, rt.b()),
            kind: StabilizerKind::Circle,
            witness: Some(Quaternion::J),
        });
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    entries.push(MenuEntry {
        subgroup: vec![0],
        kind: StabilizerKind::Free,
        witness: Some(Quaternion::from_array([h, 0.0, h, 0.0])),
    });
    StabilizerMenu { vertex, source: MenuSource::CyclicRotation, entries }
}

/// Elements of `group` fixing `point` in its quaternion realization.
pub fn point_stabilizer(group: &FiniteGroup, point: Quaternion) -> Result<Vec<usize>> {
    let r = group.realization().ok_or(Error::MissingRealization)?;
    Ok((0..group.order()).filter(|&a| r[a].act(point).distance(point) < QUAT_TOL).collect())
}

/// True iff `claimed` is exactly the stabilizer of the unit quaternion
/// `point` and is a subgroup.
pub fn verify_so4_certificate(group: &FiniteGroup, point: Quaternion, claimed: &[usize]) -> Result<bool> {
    let stab = point_stabilizer(group, point)?;
    if (point.norm() - 1.0).abs() > QUAT_TOL {
        return Ok(false);
    }
    let mut claimed: Vec<usize> = claimed.to_vec();
    claimed.sort_unstable();
    claimed.dedup();
    Ok(claimed == stab && is_subgroup(group, &stab))
}

fn is_subgroup(group: &FiniteGroup, elems: &[usize]) -> bool {
    let set = to_bitset(group, elems);
    set.contains(0) && elems.iter().all(|&a| elems.iter().all(|&b| set.contains(group.mul(a, b))))
}

fn to_bitset(group: &FiniteGroup, elems: &[usize]) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(group.order());
    for &a in elems {
        if a < group.order() {
            set.insert(a);
        }
    }
    set
}

fn matrix_of(group: &FiniteGroup, a: usize) -> Matrix4<f64> {
    let m = group.realization().expect("realized")[a].matrix();
    Matrix4::from_fn(|i, j| m[i][j])
}

/// Orthonormal basis of the kernel of the positive semidefinite `s`.
fn null_space(s: Matrix4<f64>) -> Vec<Vector4<f64>> {
    let eig = SymmetricEigen::new(s);
    (0..4)
        .filter(|&i| eig.eigenvalues[i].abs() < 1e-8)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect()
}

fn gram(d: Matrix4<f64>) -> Matrix4<f64> {
    d.transpose() * d
}

fn to_quat(v: &Vector4<f64>) -> Quaternion {
    let v = v.normalize();
    Quaternion::from_array([v[0], v[1], v[2], v[3]])
}

fn projector_key(basis: &[Vector4<f64>]) -> Vec<i64> {
    let p: Matrix4<f64> = basis.iter().map(|v| v * v.transpose()).sum();
    p.iter().map(|x| (x * 1e6).round() as i64).collect()
}

/// Stabilizer menu read off the fixed subspaces of a realized group: one
/// circle entry per conjugacy class of plane stabilizers, one isolated-point
/// entry per orbit of points whose stabilizer fixes only a line, and the free
/// entry.
pub fn automatic_menu(vertex: VertexId, group: &FiniteGroup) -> Result<StabilizerMenu> {
    if group.realization().is_none() {
        return Err(Error::MissingRealization);
    }
    let n = group.order();
    let id = Matrix4::<f64>::identity();
    let grams: Vec<Matrix4<f64>> = (0..n).map(|a| gram(matrix_of(group, a) - id)).collect();

    let mut seen = HashSet::new();
    let mut planes: Vec<Vec<Vector4<f64>>> = Vec::new();
    for g in grams.iter().skip(1) {
        let basis = null_space(*g);
        if basis.len() == 2 && seen.insert(projector_key(&basis)) {
            planes.push(basis);
        }
    }

    let mut entries: Vec<MenuEntry> = Vec::new();
    let mut circle_sets: Vec<FixedBitSet> = Vec::new();
    for basis in &planes {
        let stab = point_stabilizer(group, to_quat(&basis[0]))?;
        let stab: Vec<usize> = stab.into_iter().filter(|&a| point_fixed(group, a, &basis[1])).collect();
        let set = to_bitset(group, &stab);
        if circle_sets.iter().any(|c| conjugating_element(group, c, &set).is_some()) {
            continue;
        }
        let witness = generic_point(group, &stab, |c| basis[0] * c.cos() + basis[1] * c.sin())?;
        circle_sets.push(set);
        entries.push(MenuEntry { subgroup: stab, kind: StabilizerKind::Circle, witness: Some(witness) });
    }

    let mut lines = HashSet::new();
    let mut isolated: Vec<Quaternion> = Vec::new();
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let proj = |b: &[Vector4<f64>]| -> Matrix4<f64> { b.iter().map(|v| v * v.transpose()).sum() };
            let s = (id - proj(&planes[i])) + (id - proj(&planes[j]));
            let line = null_space(s);
            if line.len() != 1 || !lines.insert(projector_key(&line)) {
                continue;
            }
            let p = to_quat(&line[0]);
            let stab = point_stabilizer(group, p)?;
            let fixed: Matrix4<f64> = stab.iter().map(|&a| grams[a]).sum();
            if null_space(fixed).len() != 1 {
                continue;
            }
            for q in [p, -p] {
                if isolated.iter().any(|&w| in_orbit(group, w, q)) {
                    continue;
                }
                isolated.push(q);
                entries.push(MenuEntry {
                    subgroup: point_stabilizer(group, q)?,
                    kind: StabilizerKind::IsolatedPoint,
                    witness: Some(q),
                });
            }
        }
    }

    let generic = |c: f64| Vector4::new(1.0, c.sqrt() + 1.0, 2.0f64.sqrt() * c, 5.0f64.sqrt() - c);
    let witness = generic_point(group, &[0], generic)?;
    entries.push(MenuEntry { subgroup: vec![0], kind: StabilizerKind::Free, witness: Some(witness) });
    entries.sort_by(|a, b| (a.kind, b.subgroup.len()).cmp(&(b.kind, a.subgroup.len())).then(a.subgroup.cmp(&b.subgroup)));
    Ok(StabilizerMenu { vertex, source: MenuSource::Automatic, entries })
}

/// Every subgroup that is the full stabilizer of a point with a nontrivial
/// stabilizer: one per fixed plane and one per line where two planes meet.
pub fn point_stabilizer_subgroups(group: &FiniteGroup) -> Result<Vec<FixedBitSet>> {
    if group.realization().is_none() {
        return Err(Error::MissingRealization);
    }
    let n = group.order();
    let id = Matrix4::<f64>::identity();
    let grams: Vec<Matrix4<f64>> = (0..n).map(|a| gram(matrix_of(group, a) - id)).collect();
    let proj = |b: &[Vector4<f64>]| -> Matrix4<f64> { b.iter().map(|v| v * v.transpose()).sum() };
    let mut seen = HashSet::new();
    let mut planes: Vec<Vec<Vector4<f64>>> = Vec::new();
    for g in grams.iter().skip(1) {
        let basis = null_space(*g);
        if basis.len() == 2 && seen.insert(projector_key(&basis)) {
            planes.push(basis);
        }
    }
    let fixing = |vs: &[Vector4<f64>]| -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(n);
        for a in 0..n {
            if vs.iter().all(|v| point_fixed(group, a, v)) {
                set.insert(a);
            }
        }
        set
    };
    let mut out: Vec<FixedBitSet> = Vec::new();
    let push = |set: FixedBitSet, out: &mut Vec<FixedBitSet>| {
        if !out.contains(&set) {
            out.push(set);
        }
    };
    for basis in &planes {
        push(fixing(basis), &mut out);
    }
    let mut lines = HashSet::new();
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let line = null_space((id - proj(&planes[i])) + (id - proj(&planes[j])));
            if line.len() == 1 && lines.insert(projector_key(&line)) {
                push(fixing(&line), &mut out);
            }
        }
    }
    Ok(out)
}

fn point_fixed(group: &FiniteGroup, a: usize, v: &Vector4<f64>) -> bool {
    let q = to_quat(v);
    group.realization().unwrap()[a].act(q).distance(q) < QUAT_TOL
}

fn in_orbit(group: &FiniteGroup, from: Quaternion, to: Quaternion) -> bool {
    group.realization().unwrap().iter().any(|r| r.act(from).distance(to) < QUAT_TOL)
}

/// A point of the family `f(c)` whose stabilizer is exactly `stab`.
fn generic_point(group: &FiniteGroup, stab: &[usize], f: impl Fn(f64) -> Vector4<f64>) -> Result<Quaternion> {
    for k in 0..64 {
        let q = to_quat(&f(0.739_085_133_2 + 0.414_213_562 * k as f64));
        if point_stabilizer(group, q)? == stab {
            return Ok(q);
        }
    }
    Err(Error::InvalidGroup("no generic point found for a fixed subspace".into()))
}

/// The menu used for a vertex: a declared one if given, otherwise one derived
/// from the vertex group's rotation type or realization.
pub fn resolve_menu(graph: &GraphOfGroups, v: VertexId, declared: Option<&StabilizerMenu>) -> Result<StabilizerMenu> {
    if let Some(menu) = declared {
        return Ok(menu.clone());
    }
    let group = &graph.vertex(v).ok_or(Error::UnknownVertex(v))?.group;
    if group.order() == 1 {
        let entry = MenuEntry { subgroup: vec![0], kind: StabilizerKind::Free, witness: Some(Quaternion::ONE) };
        return Ok(StabilizerMenu { vertex: v, source: MenuSource::Trivial, entries: vec![entry] });
    }
    if let Some(rt) = CyclicRotationType::of_group(group) {
        return Ok(cyclic_stabilizer_menu(v, &rt));
    }
    if group.realization().is_some() {
        return automatic_menu(v, group);
    }
    Err(Error::MissingMenu(v))
}

pub fn resolve_menus(
    graph: &GraphOfGroups,
    declared: &BTreeMap<VertexId, StabilizerMenu>,
) -> Result<BTreeMap<VertexId, StabilizerMenu>> {
    graph.vertices().iter().map(|v| Ok((v.id, resolve_menu(graph, v.id, declared.get(&v.id))?))).collect()
}

/// Structural problems of a menu: entries that are not subgroups, and
/// distinct circle entries sharing a nontrivial element.
pub fn menu_problems(group: &FiniteGroup, menu: &StabilizerMenu) -> Vec<String> {
    let mut out = Vec::new();
    for (i, e) in menu.entries.iter().enumerate() {
        if e.subgroup.iter().any(|&a| a >= group.order()) {
            out.push(format!("entry {i}: element index out of range"));
        } else if !is_subgroup(group, &e.subgroup) {
            out.push(format!("entry {i}: not a subgroup"));
        }
        if e.kind == StabilizerKind::Free && e.subgroup.iter().any(|&a| a != 0) {
            out.push(format!("entry {i}: free entry with nontrivial subgroup"));
        }
    }
    let circles: Vec<(usize, FixedBitSet)> = menu
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kind == StabilizerKind::Circle)
        .map(|(i, e)| (i, to_bitset(group, &e.subgroup)))
        .collect();
    for (x, (i, a)) in circles.iter().enumerate() {
        for (j, b) in &circles[x + 1..] {
            if a != b && a.intersection(b).any(|g| g != 0) {
                out.push(format!("circle entries {i} and {j} share a nontrivial element"));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeEnd {
    Alpha,
    Omega,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndMatch {
    pub edge: EdgeId,
    pub end: EdgeEnd,
    pub vertex: VertexId,
    pub entry: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub edge: EdgeId,
    pub end: EdgeEnd,
    pub vertex: VertexId,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AttachmentReport {
    pub matches: Vec<EndMatch>,
    pub violations: Vec<Violation>,
}

impl AttachmentReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Matches every edge end against the menu of its vertex up to conjugacy.
/// Circle and free entries take any number of ends, isolated points one.
pub fn check_attachments(
    graph: &GraphOfGroups,
    menus: &BTreeMap<VertexId, StabilizerMenu>,
) -> Result<AttachmentReport> {
    let mut report = AttachmentReport::default();
    let mut used: BTreeMap<(VertexId, usize), usize> = BTreeMap::new();
    for e in graph.edges() {
        for (end, vertex, hom) in [(EdgeEnd::Alpha, e.ends.0, &e.alpha), (EdgeEnd::Omega, e.ends.1, &e.omega)] {
            let menu = menus.get(&vertex).ok_or(Error::MissingMenu(vertex))?;
            let group = &graph.vertex(vertex).ok_or(Error::UnknownVertex(vertex))?.group;
            let image = hom.image_set();
            let candidates: Vec<usize> = menu
                .entries
                .iter()
                .enumerate()
                .filter(|(_, m)| {
                    m.subgroup.len() == image.count_ones(..)
                        && conjugating_element(group, &to_bitset(group, &m.subgroup), &image).is_some()
                })
                .map(|(i, _)| i)
                .collect();
            let pick = candidates
                .iter()
                .copied()
                .find(|&i| menu.entries[i].kind != StabilizerKind::IsolatedPoint)
                .or_else(|| candidates.iter().copied().find(|&i| !used.contains_key(&(vertex, i))));
            match pick {
                Some(entry) => {
                    *used.entry((vertex, entry)).or_default() += 1;
                    report.matches.push(EndMatch { edge: e.id, end, vertex, entry });
                }
                None => {
                    let reason = if candidates.is_empty() {
                        format!("edge group image of order {} is not a point stabilizer at {vertex}", image.count_ones(..))
                    } else {
                        "isolated fixed point already used by another edge".to_string()
                    };
                    report.violations.push(Violation { edge: e.id, end, vertex, reason });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct So3EdgeCheck {
    pub edge: EdgeId,
    pub order: usize,
    pub class: So3Class,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct So3Report {
    pub edges: Vec<So3EdgeCheck>,
}

impl So3Report {
    pub fn passed(&self) -> bool {
        self.edges.iter().all(|c| c.class.is_realizable())
    }

    pub fn failures(&self) -> impl Iterator<Item = &So3EdgeCheck> {
        self.edges.iter().filter(|c| !c.class.is_realizable())
    }
}

pub fn check_so3_edge_groups(graph: &GraphOfGroups) -> So3Report {
    let edges = graph
        .edges()
        .iter()
        .map(|e| So3EdgeCheck { edge: e.id, order: e.group.order(), class: classify_so3_subgroup(&e.group) })
        .collect();
    So3Report { edges }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum So4Status {
    /// A quaternion realization was checked to be a faithful homomorphism.
    Realized,
    /// A family with a standard orthogonal action.
    KnownFamily(String),
    /// No realization to check; accepted with a warning.
    Unverified,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct So4VertexCheck {
    pub vertex: VertexId,
    pub order: usize,
    #[serde(flatten)]
    pub status: So4Status,
}

pub fn check_so4_vertex_groups(graph: &GraphOfGroups) -> Vec<So4VertexCheck> {
    graph
        .vertices()
        .iter()
        .map(|v| {
            let g = &v.group;
            let status = if g.realization().is_some() {
                if g.verify_realization() {
                    So4Status::Realized
                } else {
                    So4Status::Failed("quaternion realization is not a faithful homomorphism".into())
                }
            } else {
                match g.family() {
                    Family::Generic | Family::CentralProduct => {
                        log::warn!("{}: no orthogonal realization to check", v.id);
                        So4Status::Unverified
                    }
                    f => So4Status::KnownFamily(f.to_string()),
                }
            };
            So4VertexCheck { vertex: v.id, order: g.order(), status }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub vertex: VertexId,
    pub entry: usize,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MenuSummary {
    pub vertex: VertexId,
    pub source: String,
    pub entries: usize,
    pub problems: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub normal_form: bool,
    pub trivial_edges: Vec<EdgeId>,
    pub so3: So3Report,
    pub so4: Vec<So4VertexCheck>,
    pub menus: Vec<MenuSummary>,
    pub certificates: Vec<CertificateCheck>,
    pub attachments: AttachmentReport,
    pub admissible: bool,
}

/// Runs every check. Declared menus override derived ones; witnesses of
/// declared entries are certified against the realization when one exists.
pub fn admissibility_report(
    graph: &GraphOfGroups,
    declared: &BTreeMap<VertexId, StabilizerMenu>,
) -> Result<AdmissibilityReport> {
    let trivial_edges = graph.trivial_edges();
    let so3 = check_so3_edge_groups(graph);
    let so4 = check_so4_vertex_groups(graph);
    let menus = resolve_menus(graph, declared)?;
    let mut summaries = Vec::new();
    let mut certificates = Vec::new();
    for (v, menu) in &menus {
        let group = &graph.vertex(*v).unwrap().group;
        summaries.push(MenuSummary {
            vertex: *v,
            source: menu.source.to_string(),
            entries: menu.entries.len(),
            problems: menu_problems(group, menu),
        });
        if menu.source != MenuSource::Declared || group.realization().is_none() {
            continue;
        }
        for (i, e) in menu.entries.iter().enumerate() {
            if let Some(w) = e.witness {
                let verified = verify_so4_certificate(group, w, &e.subgroup)?;
                certificates.push(CertificateCheck { vertex: *v, entry: i, verified });
            }
        }
    }
    let attachments = check_attachments(graph, &menus)?;
    let admissible = trivial_edges.is_empty()
        && so3.passed()
        && so4.iter().all(|c| !matches!(c.status, So4Status::Failed(_)))
        && summaries.iter().all(|s| s.problems.is_empty())
        && certificates.iter().all(|c| c.verified)
        && attachments.is_admissible();
    Ok(AdmissibilityReport {
        normal_form: trivial_edges.is_empty(),
        trivial_edges,
        so3,
        so4,
        menus: summaries,
        certificates,
        attachments,
        admissible,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::gog::{Edge, Vertex};
    use crate::groups::{make_binary_dihedral, make_central_product, make_cyclic, make_cyclic_rotation, GroupHom};

    fn rot(m: u32, s: u32, t: u32) -> Arc<FiniteGroup> {
        Arc::new(make_cyclic_rotation(m, s, t).unwrap())
    }

    fn emb(e: &Arc<FiniteGroup>, m: &Arc<FiniteGroup>) -> GroupHom {
        let images = if e.order() > 1 { vec![m.order() / e.order()] } else { vec![] };
        GroupHom::new(e.clone(), m.clone(), images).unwrap()
    }

    fn path(a: &Arc<FiniteGroup>, e: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> GraphOfGroups {
        GraphOfGroups::new(
            vec![Vertex { id: VertexId(0), group: a.clone() }, Vertex { id: VertexId(1), group: b.clone() }],
            vec![Edge { id: EdgeId(0), group: e.clone(), ends: (VertexId(0), VertexId(1)), alpha: emb(e, a), omega: emb(e, b) }],
        )
        .unwrap()
    }

    fn orders(menu: &StabilizerMenu) -> Vec<(StabilizerKind, usize)> {
        let mut v: Vec<_> = menu.entries.iter().map(|e| (e.kind, e.subgroup.len())).collect();
        v.sort();
        v
    }

    #[test]
    fn cyclic_menus() {
        let m = cyclic_stabilizer_menu(VertexId(0), &CyclicRotationType::new(12, 3, 4).unwrap());
        assert_eq!(orders(&m), vec![(StabilizerKind::Circle, 3), (StabilizerKind::Circle, 4), (StabilizerKind::Free, 1)]);
        let m = cyclic_stabilizer_menu(VertexId(0), &CyclicRotationType::new(5, 1, 1).unwrap());
        assert_eq!(orders(&m), vec![(StabilizerKind::Free, 1)]);
        let rt = CyclicRotationType::new(6, 2, 3).unwrap();
        assert_eq!((rt.a(), rt.b()), (2, 3));
        assert!(CyclicRotationType::new(6, 2, 4).is_err());
    }

    #[test]
    fn circle_orders_coprime_exhaustive() {
        for m in 1..=200u32 {
            for s in 0..m {
                for t in 0..m {
                    if let Ok(rt) = CyclicRotationType::new(m, s, t) {
                        assert_eq!(rt.a().gcd(&rt.b()), 1, "m={m} s={s} t={t}");
                    }
                }
            }
        }
    }

    #[test]
    fn certificates_agree_with_gcd_formula() {
        for (m, s, t) in [(12, 3, 4), (6, 2, 3), (20, 4, 5), (30, 6, 5), (7, 1, 3), (12, 3, 1)] {
            let g = make_cyclic_rotation(m, s, t).unwrap();
            let rt = CyclicRotationType::new(m, s, t).unwrap();
            let menu = cyclic_stabilizer_menu(VertexId(0), &rt);
            for e in &menu.entries {
                assert!(verify_so4_certificate(&g, e.witness.unwrap(), &e.subgroup).unwrap(), "m={m} s={s} t={t}");
            }
            let on_first = point_stabilizer(&g, Quaternion::exp_i(0.3)).unwrap();
            assert_eq!(on_first.len() as u32, rt.a());
        }
    }

    #[test]
    fn automatic_menu_matches_rotation_menu() {
        for (m, s, t) in [(12, 3, 4), (6, 2, 3), (20, 4, 5), (9, 1, 3)] {
            let g = make_cyclic_rotation(m, s, t).unwrap();
            let rt = CyclicRotationType::new(m, s, t).unwrap();
            let auto = automatic_menu(VertexId(0), &g).unwrap();
            assert_eq!(orders(&auto), orders(&cyclic_stabilizer_menu(VertexId(0), &rt)));
        }
    }

    #[test]
    fn central_product_diagonal_is_isolated() {
        let d = make_binary_dihedral(2).unwrap();
        let c = make_central_product(&d, &d).unwrap();
        let stab = point_stabilizer(&c, Quaternion::ONE).unwrap();
        assert_eq!(stab.len(), 4);
        assert!(verify_so4_certificate(&c, Quaternion::ONE, &stab).unwrap());
        assert!(!verify_so4_certificate(&c, Quaternion::ONE, &stab[..2]).unwrap());
        let auto = automatic_menu(VertexId(0), &c).unwrap();
        assert!(auto
            .entries
            .iter()
            .any(|e| e.kind == StabilizerKind::IsolatedPoint && e.subgroup.len() == 4));
        assert!(menu_problems(&c, &auto).is_empty());
        for e in &auto.entries {
            assert!(verify_so4_certificate(&c, e.witness.unwrap(), &e.subgroup).unwrap());
        }
    }

    #[test]
    fn trivial_group_certificate() {
        let g = make_cyclic_rotation(1, 1, 0).unwrap();
        assert!(verify_so4_certificate(&g, Quaternion::ONE, &[0]).unwrap());
        assert!(matches!(
            verify_so4_certificate(&make_cyclic(3).unwrap(), Quaternion::ONE, &[0]),
            Err(Error::MissingRealization)
        ));
    }

    #[test]
    fn attachments_accept_and_reject() {
        let (a, b) = (rot(12, 3, 4), rot(6, 3, 1));
        let g = path(&b, &Arc::new(make_cyclic(3).unwrap()), &a);
        let menus = resolve_menus(&g, &BTreeMap::new()).unwrap();
        assert!(check_attachments(&g, &menus).unwrap().is_admissible());

        let z2 = Arc::new(make_cyclic(2).unwrap());
        let bad = path(&rot(6, 3, 1), &z2, &rot(6, 2, 1));
        let menus = resolve_menus(&bad, &BTreeMap::new()).unwrap();
        let report = check_attachments(&bad, &menus).unwrap();
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].vertex, VertexId(0));
    }

    #[test]
    fn missing_menu_is_an_error() {
        let z4 = Arc::new(make_cyclic(4).unwrap());
        let z2 = Arc::new(make_cyclic(2).unwrap());
        let g = path(&z4, &z2, &z4);
        assert!(matches!(resolve_menus(&g, &BTreeMap::new()), Err(Error::MissingMenu(_))));
        assert!(matches!(check_attachments(&g, &BTreeMap::new()), Err(Error::MissingMenu(_))));
    }

    #[test]
    fn isolated_point_takes_one_end() {
        let z2 = Arc::new(make_cyclic(2).unwrap());
        let z4 = Arc::new(make_cyclic(4).unwrap());
        let id2 = GroupHom::identity(z2.clone());
        let g = GraphOfGroups::new(
            vec![Vertex { id: VertexId(0), group: z4.clone() }, Vertex { id: VertexId(1), group: z2.clone() }],
            vec![
                Edge { id: EdgeId(0), group: z2.clone(), ends: (VertexId(0), VertexId(1)), alpha: emb(&z2, &z4), omega: id2.clone() },
                Edge { id: EdgeId(1), group: z2.clone(), ends: (VertexId(0), VertexId(1)), alpha: emb(&z2, &z4), omega: id2 },
            ],
        )
        .unwrap();
        let entry = |kind| MenuEntry { subgroup: vec![0, 2], kind, witness: None };
        let mut menus = BTreeMap::new();
        menus.insert(VertexId(0), StabilizerMenu { vertex: VertexId(0), source: MenuSource::Declared, entries: vec![entry(StabilizerKind::IsolatedPoint)] });
        menus.insert(VertexId(1), StabilizerMenu {
            vertex: VertexId(1),
            source: MenuSource::Declared,
            entries: vec![MenuEntry { subgroup: vec![0, 1], kind: StabilizerKind::Circle, witness: None }],
        });
        let report = check_attachments(&g, &menus).unwrap();
        assert_eq!(report.violations.len(), 1);
        menus.get_mut(&VertexId(0)).unwrap().entries[0].kind = StabilizerKind::Circle;
        assert!(check_attachments(&g, &menus).unwrap().is_admissible());
    }

    #[test]
    fn so3_edge_checks() {
        let z3 = Arc::new(make_cyclic(3).unwrap());
        let g = path(&rot(6, 3, 1), &z3, &rot(12, 3, 4));
        assert!(check_so3_edge_groups(&g).passed());
        let rows: Vec<Vec<u32>> = (0..8u32).map(|a| (0..8u32).map(|b| a ^ b).collect()).collect();
        let e = Arc::new(FiniteGroup::from_table(&rows).unwrap());
        let v = Arc::new(FiniteGroup::from_table(&rows).unwrap());
        let id = GroupHom::identity(e.clone());
        let g = GraphOfGroups::new(
            vec![Vertex { id: VertexId(0), group: v.clone() }],
            vec![Edge { id: EdgeId(0), group: e.clone(), ends: (VertexId(0), VertexId(0)), alpha: id.clone(), omega: GroupHom::new(e, v, id.images().to_vec()).unwrap() }],
        )
        .unwrap();
        let report = check_so3_edge_groups(&g);
        assert!(!report.passed());
        assert_eq!(report.failures().count(), 1);
    }

    #[test]
    fn menu_invariant_flags_shared_prime_subgroup() {
        let g = make_cyclic(12).unwrap();
        let menu = StabilizerMenu {
            vertex: VertexId(0),
            source: MenuSource::Declared,
            entries: vec![
                MenuEntry { subgroup: vec![0, 6], kind: StabilizerKind::Circle, witness: None },
                MenuEntry { subgroup: vec![0, 3, 6, 9], kind: StabilizerKind::Circle, witness: None },
                MenuEntry { subgroup: vec![0, 5], kind: StabilizerKind::Circle, witness: None },
            ],
        };
        let problems = menu_problems(&g, &menu);
        assert_eq!(problems.len(), 2, "{problems:?}");
    }
}

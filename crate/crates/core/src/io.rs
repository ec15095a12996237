//! Instance documents, run reports and DOT export.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::admissibility::{MenuEntry, MenuSource, StabilizerMenu};
use crate::error::{Error, Result};
use crate::gog::{Edge, EdgeId, GraphOfGroups, Vertex, VertexId};
use crate::groups::{FiniteGroup, GroupHom, GroupSpec, PolyhedralKind};
use crate::homsearch::Surjection;

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: VertexId,
    pub group: GroupSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub menu: Option<Vec<MenuEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: EdgeId,
    pub group: GroupSpec,
    pub ends: [VertexId; 2],
    pub alpha: Vec<usize>,
    pub omega: Vec<usize>,
}

/// Generator images of the vertex groups and stable letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurjectionDoc {
    pub vertices: BTreeMap<VertexId, Vec<usize>>,
    #[serde(default)]
    pub stable_letters: BTreeMap<EdgeId, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surjection: Option<SurjectionDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A validated document with every group constructed.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: GraphOfGroups,
    pub menus: BTreeMap<VertexId, StabilizerMenu>,
    pub target: Option<Arc<FiniteGroup>>,
    pub surjection: Option<Surjection>,
    pub notes: Vec<String>,
}

impl InstanceDocument {
    pub fn from_parts(
        graph: &GraphOfGroups,
        menus: &BTreeMap<VertexId, StabilizerMenu>,
        surjection: Option<&Surjection>,
        notes: &[String],
    ) -> Self {
        let vertices = graph
            .vertices()
            .iter()
            .map(|v| VertexDoc {
                id: v.id,
                group: v.group.spec().clone(),
                menu: menus.get(&v.id).map(|m| m.entries.clone()),
            })
            .collect();
        let edges = graph
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                id: e.id,
                group: e.group.spec().clone(),
                ends: [e.ends.0, e.ends.1],
                alpha: e.alpha.images().to_vec(),
                omega: e.omega.images().to_vec(),
            })
            .collect();
        let (target, surjection) = match surjection {
            Some(s) => {
                let t = s.image_table();
                (
                    Some(s.target().spec().clone()),
                    Some(SurjectionDoc { vertices: t.vertices, stable_letters: t.stable_letters }),
                )
            }
            None => (None, None),
        };
        InstanceDocument { schema_version: SCHEMA_VERSION, vertices, edges, target, surjection, notes: notes.to_vec() }
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let mut doc = Self::from_parts(&inst.graph, &inst.menus, inst.surjection.as_ref(), &inst.notes);
        if doc.target.is_none() {
            doc.target = inst.target.as_ref().map(|t| t.spec().clone());
        }
        doc
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    /// SHA-256 of the compact serialization.
    pub fn digest(&self) -> String {
        digest_bytes(serde_json::to_string(self).expect("document serializes").as_bytes())
    }

    /// Constructs all groups and checks the graph and the surjection maps.
    pub fn build(&self) -> Result<Instance> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema {
                path: "schema_version".into(),
                message: format!("unsupported version {}", self.schema_version),
            });
        }
        let mut cache: HashMap<GroupSpec, Arc<FiniteGroup>> = HashMap::new();
        let mut build = |spec: &GroupSpec| -> Result<Arc<FiniteGroup>> {
            if let Some(g) = cache.get(spec) {
                return Ok(g.clone());
            }
            let g = Arc::new(spec.build()?);
            cache.insert(spec.clone(), g.clone());
            Ok(g)
        };
        let mut vertices = Vec::new();
        let mut menus = BTreeMap::new();
        for v in &self.vertices {
            vertices.push(Vertex { id: v.id, group: build(&v.group)? });
            if let Some(entries) = &v.menu {
                menus.insert(v.id, StabilizerMenu { vertex: v.id, source: MenuSource::Declared, entries: entries.clone() });
            }
        }
        let lookup: HashMap<VertexId, Arc<FiniteGroup>> = vertices.iter().map(|v| (v.id, v.group.clone())).collect();
        let mut edges = Vec::new();
        for e in &self.edges {
            let group = build(&e.group)?;
            let end = |v: VertexId| lookup.get(&v).cloned().ok_or(Error::UnknownVertex(v));
            let (u, w) = (end(e.ends[0])?, end(e.ends[1])?);
            let hom = |images: &[usize], to: Arc<FiniteGroup>, name: &str| {
                GroupHom::new(group.clone(), to, images.to_vec())
                    .map_err(|err| Error::InvalidEdge { edge: e.id, reason: format!("{name}: {err}") })
            };
            let alpha = hom(&e.alpha, u, "alpha")?;
            let omega = hom(&e.omega, w, "omega")?;
            edges.push(Edge { id: e.id, group: group.clone(), ends: (e.ends[0], e.ends[1]), alpha, omega });
        }
        let graph = GraphOfGroups::new(vertices, edges)?;
        let target = self.target.as_ref().map(&mut build).transpose()?;
        let surjection = match (&self.surjection, &target) {
            (Some(doc), Some(t)) => Some(Surjection::new(&graph, t.clone(), &doc.vertices, &doc.stable_letters)?),
            (Some(_), None) => {
                return Err(Error::Schema { path: "surjection".into(), message: "a surjection needs a target".into() })
            }
            (None, _) => None,
        };
        Ok(Instance { graph, menus, target, surjection, notes: self.notes.clone() })
    }
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses document text; schema errors carry the field path and position.
pub fn parse_document(text: &str) -> Result<InstanceDocument> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Schema { path, message: format!("{inner} (line {}, column {})", inner.line(), inner.column()) }
    })
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    parse_document(text)?.build()
}

/// Group literal from the command line: either JSON or a short form such as
/// `cyclic:12`, `dihedral:6`, `binary_dihedral:3`, `polyhedral:icosahedral`
/// or `central_product:<spec>*<spec>`.
pub fn parse_group_spec(text: &str) -> Result<GroupSpec> {
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| Error::Schema { path: "group".into(), message: e.to_string() });
    }
    let bad = || Error::Schema { path: "group".into(), message: format!("cannot parse group literal `{text}`") };
    let (family, arg) = text.split_once(':').ok_or_else(bad)?;
    let num = || arg.parse::<u32>().map_err(|_| bad());
    Ok(match family {
        "cyclic" => GroupSpec::Cyclic { n: num()?, rotation: None },
        "dihedral" => GroupSpec::Dihedral { n: num()? },
        "binary_dihedral" => GroupSpec::BinaryDihedral { n: num()? },
        "polyhedral" => {
            let kind: PolyhedralKind = serde_json::from_value(serde_json::Value::String(arg.into())).map_err(|_| bad())?;
            GroupSpec::Polyhedral { kind }
        }
        "central_product" => {
            let (l, r) = arg.split_once('*').ok_or_else(bad)?;
            GroupSpec::CentralProduct { left: Box::new(parse_group_spec(l)?), right: Box::new(parse_group_spec(r)?) }
        }
        _ => return Err(bad()),
    })
}

/// Short human-readable name of a group literal.
pub fn spec_name(spec: &GroupSpec) -> String {
    match spec {
        GroupSpec::Cyclic { n, rotation: None } => format!("Z{n}"),
        GroupSpec::Cyclic { n, rotation: Some([s, t]) } => format!("Z{n}({s},{t})"),
        GroupSpec::Dihedral { n } => format!("D{}", 2 * n),
        GroupSpec::BinaryDihedral { n } => format!("D*{}", 4 * n),
        GroupSpec::CentralProduct { left, right } => format!("{}x{}", spec_name(left), spec_name(right)),
        GroupSpec::Polyhedral { kind } => format!("{kind:?}"),
        GroupSpec::Table { rows } => format!("table{}", rows.len()),
        GroupSpec::Subgroup { of, generators } => format!("<{generators:?}> in {}", spec_name(of)),
    }
}

/// DOT rendering of a graph of groups.
pub fn graph_to_dot(graph: &GraphOfGroups) -> String {
    let mut out = String::from("graph gog {\n");
    for v in graph.vertices() {
        let _ = writeln!(out, "  {} [label=\"{}: {} ({})\"];", v.id, v.id, spec_name(v.group.spec()), v.group.order());
    }
    for e in graph.edges() {
        let _ = writeln!(out, "  {} -- {} [label=\"{}: {}\"];", e.ends.0, e.ends.1, e.id, e.group.order());
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Md,
    Csv,
    Json,
}

/// One line of a bound report. `bound` and `ratio` are exact fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub genus: u64,
    pub class: String,
    pub order: u64,
    pub bound: String,
    pub ratio: String,
    pub faithful: bool,
    pub witness_digest: String,
}

impl ReportRow {
    pub fn new(genus: u64, class: impl Into<String>, order: u64, bound: u64, faithful: bool, witness_digest: String) -> Self {
        let ratio = if bound == 0 {
            "undefined".to_string()
        } else {
            crate::gog::Rational::new(order.into(), bound.into()).to_string()
        };
        ReportRow { genus, class: class.into(), order, bound: bound.to_string(), ratio, faithful, witness_digest }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub rows: Vec<ReportRow>,
    #[serde(default)]
    pub results: serde_json::Value,
    pub wall_time_ms: u64,
}

impl RunReport {
    pub fn new(command: impl Into<String>, inputs: &[u8]) -> Self {
        RunReport {
            command: command.into(),
            inputs_digest: digest_bytes(inputs),
            rows: Vec::new(),
            results: serde_json::Value::Null,
            wall_time_ms: 0,
        }
    }
}

pub fn emit_report(r: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["genus", "class", "order", "bound", "ratio", "faithful", "witness-digest"]).unwrap();
            for row in &r.rows {
                w.write_record([
                    row.genus.to_string(),
                    row.class.clone(),
                    row.order.to_string(),
                    row.bound.clone(),
                    row.ratio.clone(),
                    row.faithful.to_string(),
                    row.witness_digest.clone(),
                ])
                .unwrap();
            }
            String::from_utf8(w.into_inner().unwrap()).unwrap()
        }
        ReportFormat::Md => {
            let mut out = format!("# {}\n\ninputs: `{}`\n\n", r.command, r.inputs_digest);
            out.push_str("| genus | class | order | bound | gap | ratio | faithful | witness |\n");
            out.push_str("|---|---|---|---|---|---|---|---|\n");
            for row in &r.rows {
                let gap = row.bound.parse::<u64>().map(|b| (b as i128 - row.order as i128).to_string()).unwrap_or_default();
                let short = row.witness_digest.get(..12).unwrap_or(&row.witness_digest);
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {} | `{}` |",
                    row.genus, row.class, row.order, row.bound, gap, row.ratio, row.faithful, short
                );
            }
            if !r.results.is_null() {
                let body = serde_json::to_string_pretty(&r.results).expect("results serialize");
                let _ = write!(out, "\n```json\n{body}\n```\n");
            }
            out
        }
    }
}

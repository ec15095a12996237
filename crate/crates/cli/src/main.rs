//! `handlecalc` command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use handlecalc::admissibility::admissibility_report;
use handlecalc::covering::{build_coset_graph, genus_of_cover, h1_action, is_faithful};
use handlecalc::explorer::{
    certify_bounds, example_cyclic_family, example_so4_family, search_max_order, theorem_bound, FamilyInstance,
    SearchCaps, SearchClass, SearchReport,
};
use handlecalc::gog::{euler_characteristic, genus_from_order, reduce_to_normal_form};
use handlecalc::homsearch::{find_surjections, verify_surjection, DEFAULT_LIMIT};
use handlecalc::io::{
    emit_report, parse_document, parse_group_spec, InstanceDocument, ReportFormat, ReportRow, RunReport,
};
use handlecalc::{Error, FiniteGroup, Surjection};

const CHECKPOINT_ENV: &str = "HANDLECALC_CHECKPOINT_DIR";

#[derive(Parser)]
#[command(name = "handlecalc", version, about = "Finite group actions on closed handles via graphs of groups")]
struct Cli {
    /// Reserved; every computation is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Search caps as `key=value` pairs: max-vertices, max-edges, max-order,
    /// min-order, max-attempts.
    #[arg(long, global = true)]
    caps: Option<String>,
    /// Output format. Commands producing a document print it when absent.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Md => ReportFormat::Md,
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Euler characteristic of a graph of groups.
    Chi { file: PathBuf },
    /// Genus of the handle covered by an action of the given order.
    Genus {
        file: PathBuf,
        #[arg(long)]
        order: u64,
    },
    /// Collapse edges until the graph is in normal form.
    Normalize { file: PathBuf },
    /// Normal form, SO(3)/SO(4) and attachment checks.
    Check { file: PathBuf },
    /// Surjections onto a target group, injective on vertex groups.
    Surject {
        file: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        first: bool,
    },
    /// Coset graph of a surjection: genus, faithfulness, homology.
    Cover {
        file: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        h1: bool,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Members of the example families.
    Example {
        #[command(subcommand)]
        family: Family,
    },
    /// Bounded search for the largest faithful order at a genus.
    Search(SearchArgs),
    /// Tabulate search reports, run reports and instance documents.
    Report {
        /// Files or directories; nothing gives an empty report.
        inputs: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Cyclic family of order x(x+1).
    Cyclic {
        #[arg(long)]
        x: u32,
    },
    /// Central products of binary dihedral groups, order 8n^2.
    So4 {
        #[arg(long)]
        n: u32,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    genus: u64,
    #[arg(long, value_enum, default_value = "cyclic")]
    class: ClassArg,
    #[arg(long)]
    max_vertices: Option<usize>,
    #[arg(long)]
    max_edges: Option<usize>,
    #[arg(long)]
    max_order: Option<u64>,
    /// Resumable state; relative paths resolve against $HANDLECALC_CHECKPOINT_DIR.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Cyclic,
    Any,
}

/// Result of a command: text for stdout and whether its checks passed.
struct Outcome {
    text: String,
    passed: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type Res<T> = Result<T, Error>;

fn read(path: &Path) -> Res<(Vec<u8>, InstanceDocument)> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8_lossy(&bytes);
    let doc = parse_document(&text)?;
    Ok((bytes, doc))
}

fn report_text(cli: &Cli, mut report: RunReport, started: Instant) -> String {
    report.wall_time_ms = started.elapsed().as_millis() as u64;
    emit_report(&report, cli.format.unwrap_or(Format::Json).into())
}

fn json_text(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn run(cli: &Cli) -> Res<Outcome> {
    let started = Instant::now();
    let done = |report: RunReport, passed: bool| Ok(Outcome { text: report_text(cli, report, started), passed });
    match &cli.command {
        Command::Chi { file } => {
            let (bytes, doc) = read(file)?;
            let inst = doc.build()?;
            let mut report = RunReport::new("chi", &bytes);
            report.results = json!({ "chi": euler_characteristic(&inst.graph).to_string() });
            done(report, true)
        }
        Command::Genus { file, order } => {
            let (bytes, doc) = read(file)?;
            let inst = doc.build()?;
            let genus = genus_from_order(&inst.graph, *order)?;
            let mut report = RunReport::new("genus", &bytes);
            report.results = json!({
                "chi": euler_characteristic(&inst.graph).to_string(),
                "order": order,
                "genus": genus,
            });
            done(report, true)
        }
        Command::Normalize { file } => {
            let (bytes, doc) = read(file)?;
            let inst = doc.build()?;
            let normal = reduce_to_normal_form(&inst.graph);
            let mut notes = inst.notes.clone();
            notes.push("normal form".into());
            let out = InstanceDocument::from_parts(&normal, &BTreeMap::new(), None, &notes);
            if cli.format.is_none() {
                return Ok(Outcome { text: out.to_json(), passed: true });
            }
            let mut report = RunReport::new("normalize", &bytes);
            report.results = serde_json::to_value(&out)?;
            done(report, true)
        }
        Command::Check { file } => {
            let (bytes, doc) = read(file)?;
            let inst = doc.build()?;
            let adm = admissibility_report(&inst.graph, &inst.menus)?;
            let mut passed = adm.admissible;
            let mut results = json!({ "admissibility": adm });
            if let Some(s) = &inst.surjection {
                let ok = verify_surjection(s);
                passed &= ok;
                results["surjection_valid"] = json!(ok);
                results["genus"] = json!(genus_from_order(&inst.graph, s.target().order() as u64).ok());
            }
            results["passed"] = json!(passed);
            let mut report = RunReport::new("check", &bytes);
            report.results = results;
            done(report, passed)
        }
        Command::Surject { file, target, limit, first } => {
            let (_, doc) = read(file)?;
            let inst = doc.build()?;
            let group = Arc::new(parse_group_spec(target)?.build()?);
            let limit = if *first { 1 } else { limit.unwrap_or(DEFAULT_LIMIT) };
            let found = find_surjections(&inst.graph, &group, limit);
            let tables: Vec<_> = found.surjections.iter().map(Surjection::image_table).collect();
            if found.truncated {
                eprintln!("note: stopped after {limit} surjections");
            }
            Ok(Outcome { text: json_text(&tables), passed: true })
        }
        Command::Cover { file, target, h1, dot } => {
            let (bytes, doc) = read(file)?;
            let inst = doc.build()?;
            let group = Arc::new(parse_group_spec(target)?.build()?);
            let s = surjection_onto(&inst.surjection, &inst.graph, &group)?;
            let cover = build_coset_graph(&inst.graph, &s);
            if let Some(path) = dot {
                std::fs::write(path, cover.to_dot())?;
            }
            let n = group.order() as u64;
            let from_order = genus_from_order(&inst.graph, n)?;
            let from_cover = genus_of_cover(&cover)?;
            let faith = is_faithful(&inst.graph, &s, *h1)?;
            let mut results = json!({
                "order": n,
                "components": cover.component_count(),
                "genus_from_order": from_order,
                "genus_of_cover": from_cover,
                "faithful": faith.faithful,
                "faithfulness": faith,
            });
            if *h1 {
                results["h1"] = serde_json::to_value(h1_action(&cover)?)?;
            }
            let passed = from_order == from_cover && faith.consistent();
            let mut report = RunReport::new("cover", &bytes);
            report.rows.push(instance_row(&s, from_order, faith.faithful, doc.digest()));
            report.results = results;
            done(report, passed)
        }
        Command::Example { family } => {
            let (name, inst, bound) = match family {
                Family::Cyclic { x } => {
                    let f = example_cyclic_family(*x)?;
                    let g = family_genus(&f)?;
                    (format!("example cyclic --x {x}"), f, theorem_bound(g, true))
                }
                Family::So4 { n } => {
                    let f = example_so4_family(*n)?;
                    let g = family_genus(&f)?;
                    (format!("example so4 --n {n}"), f, 2 * g * g)
                }
            };
            let doc = inst.document();
            if cli.format.is_none() {
                return Ok(Outcome { text: doc.to_json(), passed: true });
            }
            let g = family_genus(&inst)?;
            let faithful = is_faithful(&inst.graph, &inst.surjection, false)?.faithful;
            let class = if inst.target.is_cyclic() { "cyclic" } else { "so4" };
            let mut report = RunReport::new(name, doc.to_json().as_bytes());
            report.rows.push(ReportRow::new(g, class, inst.order(), bound, faithful, doc.digest()));
            report.results = json!({
                "document": doc,
                "certificate": certify_bounds(&inst.graph, &inst.surjection),
            });
            done(report, faithful)
        }
        Command::Search(args) => {
            let mut caps = parse_caps(cli.caps.as_deref())?;
            if let Some(v) = args.max_vertices {
                caps.max_vertices = v;
            }
            if let Some(e) = args.max_edges {
                caps.max_edges = e;
            }
            if args.max_order.is_some() {
                caps.max_order = args.max_order;
            }
            let class = match args.class {
                ClassArg::Cyclic => SearchClass::Cyclic,
                ClassArg::Any => SearchClass::Any,
            };
            let checkpoint = args.checkpoint.as_ref().map(|p| resolve_checkpoint(p));
            let sr = search_max_order(args.genus, class, &caps, checkpoint.as_deref())?;
            let inputs = serde_json::to_vec(&json!({ "genus": args.genus, "class": class, "caps": caps }))?;
            let passed = sr.violations().is_empty();
            let mut report = RunReport::new("search", &inputs);
            report.rows.extend(sr.row());
            report.results = serde_json::to_value(&sr)?;
            done(report, passed)
        }
        Command::Report { inputs } => {
            let mut files = Vec::new();
            for p in inputs {
                collect_files(p, &mut files)?;
            }
            let mut all = Vec::new();
            let mut report = RunReport::new("report", &[]);
            for f in &files {
                let bytes = std::fs::read(f)?;
                all.extend_from_slice(&bytes);
                report.rows.extend(rows_of(f, &bytes)?);
            }
            report.inputs_digest = handlecalc::io::digest_bytes(&all);
            done(report, true)
        }
    }
}

fn family_genus(f: &FamilyInstance) -> Res<u64> {
    genus_from_order(&f.graph, f.order())
}

/// The document's surjection when it targets the same group, otherwise the
/// first one found.
fn surjection_onto(
    declared: &Option<Surjection>,
    graph: &handlecalc::GraphOfGroups,
    group: &Arc<FiniteGroup>,
) -> Res<Surjection> {
    if let Some(s) = declared {
        if s.target().spec() == group.spec() {
            return Ok(s.clone());
        }
    }
    find_surjections(graph, group, 1)
        .surjections
        .into_iter()
        .next()
        .ok_or_else(|| Error::Search(format!("no surjection onto a group of order {}", group.order())))
}

fn instance_row(s: &Surjection, genus: u64, faithful: bool, digest: String) -> ReportRow {
    let cyclic = s.target().is_cyclic();
    let class = if cyclic { "cyclic" } else { "any" };
    ReportRow::new(genus, class, s.target().order() as u64, theorem_bound(genus, cyclic), faithful, digest)
}

fn parse_caps(text: Option<&str>) -> Res<SearchCaps> {
    let mut caps = SearchCaps::default();
    let Some(text) = text else { return Ok(caps) };
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::InvalidParameter(format!("bad caps entry `{part}`"));
        let (key, value) = part.split_once('=').ok_or_else(bad)?;
        let value: u64 = value.trim().parse().map_err(|_| bad())?;
        match key.trim() {
            "max-vertices" => caps.max_vertices = value as usize,
            "max-edges" => caps.max_edges = value as usize,
            "max-order" => caps.max_order = Some(value),
            "min-order" => caps.min_order = value,
            "max-attempts" => caps.max_attempts = value as usize,
            _ => return Err(bad()),
        }
    }
    Ok(caps)
}

fn resolve_checkpoint(path: &Path) -> PathBuf {
    match std::env::var_os(CHECKPOINT_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> Res<()> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
        entries.sort();
        for e in entries {
            if e.is_dir() || e.extension().is_some_and(|x| x == "json") {
                collect_files(&e, out)?;
            }
        }
    } else {
        out.push(path.to_path_buf());
    }
    Ok(())
}

/// Rows from a run report, a search report or an instance document.
fn rows_of(path: &Path, bytes: &[u8]) -> Res<Vec<ReportRow>> {
    let value: Value = serde_json::from_slice(bytes)?;
    if let Ok(run) = serde_json::from_value::<RunReport>(value.clone()) {
        return Ok(run.rows);
    }
    if let Ok(sr) = serde_json::from_value::<SearchReport>(value.clone()) {
        return Ok(sr.row().into_iter().collect());
    }
    let doc = parse_document(&String::from_utf8_lossy(bytes))
        .map_err(|e| Error::Search(format!("{}: not a report or instance document: {e}", path.display())))?;
    let inst = doc.build()?;
    let Some(s) = &inst.surjection else { return Ok(Vec::new()) };
    let genus = genus_from_order(&inst.graph, s.target().order() as u64)?;
    let faithful = is_faithful(&inst.graph, s, false)?.faithful;
    Ok(vec![instance_row(s, genus, faithful, doc.digest())])
}

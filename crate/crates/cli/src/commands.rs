use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::{self, Write};
use std::path::Path;

use chrono::Datelike;
use serde_json::json;

use prkg_core::access::{Privilege, WriteKind, WriteTarget};
use prkg_core::ingest::EntryState;
use prkg_core::store::{export_rdf, load_snapshot, to_snapshot_string, write_atomic};
use prkg_core::{
    AccessRule, Direction, Effect, ElementId, Engine, Error, LinkSource, NodeId, PartialDate, PropertyUpdate, RelId,
    TemporalInterval,
};

use crate::args::{
    Cli, Command, ExportCmd, Format, ImportCmd, InboxCmd, LinkCmd, NodeCmd, RelCmd, RoleCmd, RuleArgs,
};
use crate::config::Config;
use crate::error::{usage, CliError};
use crate::lock::DataLock;
use crate::parse;

/// Set to `before-rename` to fail snapshot writes after the temporary file
/// is written. Used by the crash-safety tests.
const FAULT_ENV: &str = "PRKG_FAULT";

struct Out<'w> {
    w: &'w mut dyn Write,
    format: Format,
}

impl Out<'_> {
    fn emit(&mut self, human: impl Display, record: serde_json::Value) -> io::Result<()> {
        match self.format {
            Format::Human => writeln!(self.w, "{human}"),
            Format::Lines => writeln!(self.w, "{record}"),
        }
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn today() -> PartialDate {
    let d = chrono::Local::now().date_naive();
    PartialDate::day(d.year() as u16, d.month() as u8, d.day() as u8).expect("calendar date")
}

fn open(data: &Path, cfg: &Config) -> Result<Engine, CliError> {
    let mut engine = load_snapshot(data).map_err(|e| match e {
        Error::Io { ref source, .. } if source.kind() == io::ErrorKind::NotFound => CliError::Core(Error::Io {
            path: data.to_path_buf(),
            source: io::Error::new(io::ErrorKind::NotFound, "no such file (run `prkg init --owner NAME` first)"),
        }),
        e => CliError::Core(e),
    })?;
    for spec in &cfg.extra_relations {
        engine
            .registry
            .register_relation(spec.clone())
            .map_err(|e| CliError::Config(format!("relation {}: {e}", spec.name)))?;
    }
    if let Some(t) = cfg.thresholds {
        engine.thresholds = t;
    }
    Ok(engine)
}

fn store(engine: &Engine, data: &Path) -> Result<usize, CliError> {
    let text = to_snapshot_string(engine);
    let fault = std::env::var(FAULT_ENV).is_ok_and(|v| v == "before-rename");
    write_atomic(data, text.as_bytes(), |_| {
        if fault {
            Err(io::Error::other("injected fault before rename"))
        } else {
            Ok(())
        }
    })?;
    Ok(text.len())
}

/// Loads under the lock, applies `f`, and saves only if `f` succeeded.
fn mutate<T>(
    data: &Path,
    cfg: &Config,
    f: impl FnOnce(&mut Engine) -> Result<T, CliError>,
) -> Result<T, CliError> {
    let _lock = DataLock::acquire(data)?;
    let mut engine = open(data, cfg)?;
    let value = f(&mut engine)?;
    store(&engine, data)?;
    Ok(value)
}

pub fn run(cli: Cli, w: &mut dyn Write) -> Result<(), CliError> {
    let cfg = Config::load(cli.config.as_deref())?;
    let data = cli.data.clone().unwrap_or_else(|| cfg.data_path.clone());
    let actor = cli.as_role.clone().unwrap_or_else(|| cfg.default_role.clone());
    let mut out = Out { w, format: cli.format };
    let data = data.as_path();
    let actor = actor.as_str();

    match cli.command {
        Command::Init { owner } => {
            let _lock = DataLock::acquire(data)?;
            if data.exists() {
                return Err(Error::Conflict(format!("{} already exists", data.display())).into());
            }
            let mut engine = Engine::new(&owner)?;
            engine.role(actor)?;
            if let Some(t) = cfg.thresholds {
                engine.thresholds = t;
            }
            store(&engine, data)?;
            let id = engine.graph.owner();
            out.emit(
                format_args!("initialized {} (owner node {id})", data.display()),
                json!({ "owner": id }),
            )?;
        }
        Command::Node(cmd) => node(cmd, data, &cfg, actor, &mut out)?,
        Command::Rel(cmd) => rel(cmd, data, &cfg, actor, &mut out)?,
        Command::Link(LinkCmd::Add { node, source, uri }) => {
            let source: LinkSource = source.parse().map_err(|e: Error| usage(e.to_string()))?;
            mutate(data, &cfg, |e| Ok(e.set_external_link(actor, NodeId(node), source, &uri)?))?;
            out.emit(
                format_args!("linked node {node} to {uri}"),
                json!({ "node": node, "source": source.as_str(), "uri": uri }),
            )?;
        }
        Command::Import(cmd) => import(cmd, data, &cfg, actor, &mut out)?,
        Command::Inbox(cmd) => inbox(cmd, data, &cfg, actor, &mut out)?,
        Command::Role(cmd) => role(cmd, data, &cfg, actor, &mut out)?,
        Command::Grant(args) => rule(Effect::Grant, args, data, &cfg, actor, &mut out)?,
        Command::Deny(args) => rule(Effect::Deny, args, data, &cfg, actor, &mut out)?,
        Command::Query { text } => {
            let engine = open(data, &cfg)?;
            for row in engine.query(actor, &text)? {
                let human: Vec<String> = row.iter().map(ToString::to_string).collect();
                out.emit(human.join("\t"), serde_json::to_value(&row).expect("rows serialize"))?;
            }
        }
        Command::Validate => {
            let engine = open(data, &cfg)?;
            let report = engine.validate(actor)?;
            match out.format {
                Format::Human => {
                    writeln!(out.w, "{} orphans", report.orphans.len())?;
                    for id in &report.orphans {
                        let name = engine.graph.node(*id).and_then(|n| n.name()).unwrap_or("");
                        writeln!(out.w, "  orphan ({id}) {name}")?;
                    }
                    writeln!(out.w, "{} schema warnings", report.schema_warnings.len())?;
                    for w in &report.schema_warnings {
                        writeln!(out.w, "  {w}")?;
                    }
                }
                Format::Lines => {
                    let rec = json!({ "orphans": report.orphans, "schema_warnings": report.schema_warnings });
                    writeln!(out.w, "{rec}")?;
                }
            }
        }
        Command::Export(ExportCmd::Rdf { file }) => {
            let engine = open(data, &cfg)?;
            let view = engine.view(actor)?;
            let n = export_rdf(&engine.graph, Some(&view), &cfg.rdf_base, &file)?;
            out.emit(
                format_args!("wrote {n} triples to {}", file.display()),
                json!({ "triples": n, "file": file }),
            )?;
        }
        Command::Save => {
            let _lock = DataLock::acquire(data)?;
            let engine = open(data, &cfg)?;
            if !engine
                .role(actor)?
                .check_write(&engine.graph, WriteKind::Modify, WriteTarget::Graph)?
                .is_allowed()
            {
                return Err(Error::Denied(format!("write (role {actor})")).into());
            }
            let n = store(&engine, data)?;
            out.emit(format_args!("saved {n} bytes to {}", data.display()), json!({ "bytes": n }))?;
        }
    }
    Ok(())
}

fn node(cmd: NodeCmd, data: &Path, cfg: &Config, actor: &str, out: &mut Out<'_>) -> Result<(), CliError> {
    match cmd {
        NodeCmd::Add { labels, props } => {
            let props = parse::properties(&props)?;
            let id = mutate(data, cfg, |e| Ok(e.add_node(actor, &labels, props)?))?;
            out.emit(format_args!("node {id}"), json!({ "node": id }))?;
        }
        NodeCmd::Delete { id, cascade } => {
            let n = mutate(data, cfg, |e| Ok(e.delete_node(actor, NodeId(id), cascade)?))?;
            out.emit(format_args!("deleted {n} element(s)"), json!({ "deleted": n }))?;
        }
        NodeCmd::Set { id, props, unset } => {
            let mut updates: BTreeMap<String, PropertyUpdate> = parse::properties(&props)?
                .into_iter()
                .map(|(k, v)| (k, PropertyUpdate::Set(v)))
                .collect();
            for key in unset {
                updates.insert(key, PropertyUpdate::Unset);
            }
            if updates.is_empty() {
                return Err(usage("nothing to change; give --prop or --unset"));
            }
            mutate(data, cfg, |e| Ok(e.set_properties(actor, ElementId::Node(NodeId(id)), &updates)?))?;
            out.emit(format_args!("node {id} updated"), json!({ "node": id }))?;
        }
        NodeCmd::Show { id } => {
            let engine = open(data, cfg)?;
            let view = engine.view(actor)?;
            let id = NodeId(id);
            let node = engine
                .graph
                .node(id)
                .filter(|_| view.has_node(id))
                .ok_or_else(|| Error::NotFound(format!("node {id}")))?;
            let props: BTreeMap<&String, String> =
                view.visible_properties(node).map(|(k, v)| (k, v.to_string())).collect();
            let labels: Vec<&str> = node.labels.iter().map(String::as_str).collect();
            match out.format {
                Format::Human => {
                    writeln!(out.w, "({id}) :{}", labels.join(":"))?;
                    for (k, v) in &props {
                        writeln!(out.w, "  {k} = {v}")?;
                    }
                    for link in &node.external_links {
                        writeln!(out.w, "  sameAs {} <{}>", link.source.as_str(), link.uri)?;
                    }
                    for (r, other) in engine.graph.neighbors(id, Direction::Both, None, None)? {
                        if !view.has_rel(r.id) {
                            continue;
                        }
                        let arrow = if r.src == id {
                            format!("-{}->", r.rel_type)
                        } else {
                            format!("<-{}-", r.rel_type)
                        };
                        let name = view.node_property(other, "name").map(|v| v.to_string()).unwrap_or_default();
                        writeln!(out.w, "  [{}] {arrow} ({}) {name} {}", r.id, other.id, r.validity)?;
                    }
                }
                Format::Lines => {
                    let rec = json!({ "node": id, "labels": labels, "properties": props });
                    writeln!(out.w, "{rec}")?;
                }
            }
        }
    }
    Ok(())
}

fn rel(cmd: RelCmd, data: &Path, cfg: &Config, actor: &str, out: &mut Out<'_>) -> Result<(), CliError> {
    match cmd {
        RelCmd::Add {
            src,
            dst,
            rel_type,
            start,
            end,
            props,
        } => {
            let start = start.as_deref().map(parse::date).transpose()?;
            let end = end.as_deref().map(parse::date).transpose()?;
            let validity = TemporalInterval::new(start, end)?;
            let props = parse::properties(&props)?;
            let (id, warnings) = mutate(data, cfg, |e| {
                let (src, dst) = (NodeId(src), NodeId(dst));
                let id = e.add_relationship(actor, src, dst, &rel_type, validity, props)?;
                let labels = |n: NodeId| e.graph.node(n).map(|n| n.labels.clone()).unwrap_or_default();
                Ok((id, e.registry.check_triple(&labels(src), &rel_type, &labels(dst))))
            })?;
            warn_all(&warnings);
            out.emit(format_args!("relationship {id}"), json!({ "rel": id }))?;
        }
        RelCmd::End { id, date } => {
            let date = parse::date(&date)?;
            mutate(data, cfg, |e| Ok(e.end_relationship(actor, RelId(id), date)?))?;
            out.emit(
                format_args!("relationship {id} ends {date}"),
                json!({ "rel": id, "end": date }),
            )?;
        }
    }
    Ok(())
}

fn import(cmd: ImportCmd, data: &Path, cfg: &Config, actor: &str, out: &mut Out<'_>) -> Result<(), CliError> {
    match cmd {
        ImportCmd::Triples { file } => {
            let r = mutate(data, cfg, |e| Ok(e.import_triples(actor, &file)?))?;
            warn_all(&r.warnings);
            out.emit(
                format_args!(
                    "merged {} ({} already present), queued {} ({} unanchored), dropped {}",
                    r.merged, r.duplicates, r.queued, r.unanchored, r.dropped
                ),
                json!({
                    "merged": r.merged,
                    "duplicates": r.duplicates,
                    "queued": r.queued,
                    "unanchored": r.unanchored,
                    "dropped": r.dropped,
                }),
            )?;
        }
        ImportCmd::Bibtex { file } => {
            let r = mutate(data, cfg, |e| Ok(e.import_bibtex(actor, &file)?))?;
            warn_all(&r.warnings);
            out.emit(
                format_args!("papers {}, writes edges {}", r.papers, r.writes_edges),
                json!({ "papers": r.papers, "writes_edges": r.writes_edges }),
            )?;
        }
    }
    Ok(())
}

fn inbox(cmd: InboxCmd, data: &Path, cfg: &Config, actor: &str, out: &mut Out<'_>) -> Result<(), CliError> {
    match cmd {
        InboxCmd::List { state } => {
            let state = state
                .as_deref()
                .map(str::parse::<EntryState>)
                .transpose()
                .map_err(|e| usage(e.to_string()))?;
            let engine = open(data, cfg)?;
            // curating needs the right to add facts; so does seeing candidates
            let role = engine.role(actor)?;
            if !role.check_write(&engine.graph, WriteKind::Create, WriteTarget::Graph)?.is_allowed() {
                return Err(Error::Denied(format!("inbox (role {actor})")).into());
            }
            for entry in engine.inbox.list(state) {
                let decided = entry.decided_at.map(|d| format!(" on {d}")).unwrap_or_default();
                out.emit(
                    format_args!("#{} {}{decided} {}", entry.id, entry.state, entry.candidate),
                    serde_json::to_value(entry).expect("entries serialize"),
                )?;
            }
        }
        InboxCmd::Accept { id } => {
            let m = mutate(data, cfg, |e| Ok(e.inbox_accept(actor, id, Some(today()))?))?;
            warn_all(&m.warnings);
            let human = if m.duplicate {
                format!("accepted #{id}: already present as relationship {}", m.relationship)
            } else {
                format!(
                    "accepted #{id}: relationship {}, {} new node(s)",
                    m.relationship,
                    m.created_nodes.len()
                )
            };
            out.emit(
                human,
                json!({
                    "entry": id,
                    "rel": m.relationship,
                    "created_nodes": m.created_nodes,
                    "duplicate": m.duplicate,
                }),
            )?;
        }
        InboxCmd::Reject { id } => {
            mutate(data, cfg, |e| Ok(e.inbox_reject(actor, id, Some(today()))?))?;
            out.emit(format_args!("rejected #{id}"), json!({ "entry": id }))?;
        }
    }
    Ok(())
}

fn role(cmd: RoleCmd, data: &Path, cfg: &Config, actor: &str, out: &mut Out<'_>) -> Result<(), CliError> {
    match cmd {
        RoleCmd::Create { name } => {
            mutate(data, cfg, |e| Ok(e.create_role(actor, &name)?))?;
            out.emit(format_args!("role {name} created"), json!({ "role": name }))?;
        }
        RoleCmd::Copy { new, from } => {
            mutate(data, cfg, |e| Ok(e.copy_role(actor, &new, &from)?))?;
            out.emit(
                format_args!("role {new} copied from {from}"),
                json!({ "role": new, "from": from }),
            )?;
        }
        RoleCmd::List => {
            let engine = open(data, cfg)?;
            if !engine.role(actor)?.has_control() {
                return Err(Error::Denied(format!("control (role {actor})")).into());
            }
            for r in engine.roles.roles() {
                let rules: Vec<String> = r.rules.iter().map(ToString::to_string).collect();
                out.emit(
                    format_args!("{}: {}", r.name, if rules.is_empty() { "(no rules)".into() } else { rules.join("; ") }),
                    json!({ "role": r.name, "rules": rules }),
                )?;
            }
        }
    }
    Ok(())
}

fn rule(
    effect: Effect,
    args: RuleArgs,
    data: &Path,
    cfg: &Config,
    actor: &str,
    out: &mut Out<'_>,
) -> Result<(), CliError> {
    let privilege: Privilege = args.privilege.parse().map_err(|e: Error| usage(e.to_string()))?;
    let scope = parse::scope(&args.scope)?;
    let rule = AccessRule {
        effect,
        privilege,
        scope,
    };
    let text = rule.to_string();
    mutate(data, cfg, |e| Ok(e.add_rule(actor, &args.role, rule)?))?;
    out.emit(
        format_args!("{}: {text}", args.role),
        json!({ "role": args.role, "rule": text }),
    )?;
    Ok(())
}

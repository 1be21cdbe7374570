//! Canonical JSON snapshot of an [`Engine`].
//!
//! Layout (keys always in this order, two-space indentation, trailing
//! newline): `format`, `version`, `owner`, `next_id`, `thresholds`, `nodes`
//! (by id), `relationships` (by id), `roles` (by name), `inbox`. Equal states
//! serialize to identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::access::{Role, RoleTable};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::graph::{ExternalLink, Graph, Node, NodeId, RelId, Relationship};
use crate::ingest::{Inbox, InboxEntry, Thresholds};
use crate::schema::Registry;
use crate::temporal::{PartialDate, TemporalInterval};
use crate::value::Properties;

pub const FORMAT_TAG: &str = "prkg-snapshot";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: NodeId,
    labels: BTreeSet<String>,
    properties: Properties,
    links: Vec<ExternalLink>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelRecord {
    id: RelId,
    src: NodeId,
    dst: NodeId,
    #[serde(rename = "type")]
    rel_type: String,
    start: Option<PartialDate>,
    end: Option<PartialDate>,
    properties: Properties,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InboxRecord {
    next_id: u64,
    entries: Vec<InboxEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Snapshot {
    format: String,
    version: u32,
    owner: NodeId,
    next_id: u64,
    thresholds: Thresholds,
    nodes: Vec<NodeRecord>,
    relationships: Vec<RelRecord>,
    roles: Vec<Role>,
    inbox: InboxRecord,
}

impl Snapshot {
    fn of(engine: &Engine) -> Self {
        let g = &engine.graph;
        Snapshot {
            format: FORMAT_TAG.to_string(),
            version: FORMAT_VERSION,
            owner: g.owner(),
            next_id: g.next_id(),
            thresholds: engine.thresholds,
            nodes: g
                .nodes()
                .map(|n| NodeRecord {
                    id: n.id,
                    labels: n.labels.clone(),
                    properties: n.properties.clone(),
                    links: n.external_links.clone(),
                })
                .collect(),
            relationships: g
                .relationships()
                .map(|r| RelRecord {
                    id: r.id,
                    src: r.src,
                    dst: r.dst,
                    rel_type: r.rel_type.clone(),
                    start: r.validity.start,
                    end: r.validity.end,
                    properties: r.properties.clone(),
                })
                .collect(),
            roles: engine.roles.roles().cloned().collect(),
            inbox: InboxRecord {
                next_id: engine.inbox.next_id(),
                entries: engine.inbox.list(None).into_iter().cloned().collect(),
            },
        }
    }

    fn into_engine(self) -> Result<Engine> {
        let nodes = self
            .nodes
            .into_iter()
            .map(|n| Node {
                id: n.id,
                labels: n.labels,
                properties: n.properties,
                external_links: n.links,
            })
            .collect();
        let relationships = self
            .relationships
            .into_iter()
            .map(|r| Relationship {
                id: r.id,
                src: r.src,
                dst: r.dst,
                rel_type: r.rel_type,
                validity: TemporalInterval {
                    start: r.start,
                    end: r.end,
                },
                properties: r.properties,
            })
            .collect();
        let graph = Graph::from_parts(self.owner, nodes, relationships, self.next_id)?;
        let roles = RoleTable::from_roles(self.roles)?;
        let inbox = Inbox::from_parts(self.inbox.entries, self.inbox.next_id)?;
        self.thresholds.check().map_err(|e| Error::Integrity {
            record: "thresholds".into(),
            message: e.to_string(),
        })?;
        Ok(Engine {
            graph,
            roles,
            inbox,
            thresholds: self.thresholds,
            registry: Registry::builtin(),
        })
    }
}

/// Serializes the engine state in canonical form.
pub fn to_snapshot_string(engine: &Engine) -> String {
    let mut text = serde_json::to_string_pretty(&Snapshot::of(engine)).expect("snapshot serializes");
    text.push('\n');
    text
}

/// Rebuilds an engine from snapshot text. The registry is the built-in one;
/// callers add configured relations afterwards.
pub fn from_snapshot_str(text: &str) -> Result<Engine> {
    let parse_err = |e: serde_json::Error| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    };
    let header: BTreeMap<String, serde_json::Value> = serde_json::from_str(text).map_err(parse_err)?;
    match header.get("format").and_then(|v| v.as_str()) {
        Some(FORMAT_TAG) => {}
        other => {
            return Err(Error::Unsupported(format!(
                "not a {FORMAT_TAG} file (format tag {other:?})"
            )))
        }
    }
    match header.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => return Err(Error::Unsupported(format!("snapshot version {v}"))),
        None => return Err(Error::Unsupported("snapshot without a version".into())),
    }
    let snapshot: Snapshot = serde_json::from_str(text).map_err(parse_err)?;
    snapshot.into_engine()
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so `path` holds either the old or the new content.
/// `before_rename` runs after the temporary file is complete.
pub fn write_atomic<F>(path: &Path, bytes: &[u8], before_rename: F) -> Result<()>
where
    F: FnOnce(&Path) -> std::io::Result<()>,
{
    let tmp = temp_path(path);
    let result = (|| {
        let mut file = File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        before_rename(&tmp)?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Saves the engine state; returns the number of bytes written.
pub fn save_snapshot(engine: &Engine, path: &Path) -> Result<usize> {
    let text = to_snapshot_string(engine);
    write_atomic(path, text.as_bytes(), |_| Ok(()))?;
    Ok(text.len())
}

pub fn load_snapshot(path: &Path) -> Result<Engine> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_snapshot_str(&text)
}

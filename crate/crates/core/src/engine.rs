//! The full engine state plus role-checked entry points.
//!
//! Every mutating method takes the name of the acting role and consults its
//! write (or control) rules before touching anything.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::access::{view_as, AccessRule, Role, RoleTable, View, WriteKind, WriteTarget};
use crate::error::{Error, Result};
use crate::graph::{ElementId, Graph, LinkSource, NodeId, RelId, ValidationReport};
use crate::ingest::{self, BibReport, CandidateTriple, Inbox, MergeReport, SubmitReport, Thresholds};
use crate::query::{self, Row};
use crate::schema::Registry;
use crate::temporal::{PartialDate, TemporalInterval};
use crate::value::{Properties, PropertyUpdate};

#[derive(Debug, Clone, PartialEq)]
pub struct Engine {
    pub graph: Graph,
    pub roles: RoleTable,
    pub inbox: Inbox,
    pub thresholds: Thresholds,
    /// Vocabulary for schema warnings; supplied by configuration, not stored.
    pub registry: Registry,
}

fn denied(what: &str, role: &str) -> Error {
    Error::Denied(format!("{what} (role {role})"))
}

impl Engine {
    pub fn new(owner_name: &str) -> Result<Self> {
        Ok(Engine {
            graph: Graph::new(owner_name)?,
            roles: RoleTable::new(),
            inbox: Inbox::new(),
            thresholds: Thresholds::default(),
            registry: Registry::builtin(),
        })
    }

    pub fn role(&self, name: &str) -> Result<&Role> {
        self.roles.get(name)
    }

    fn require_write(&self, actor: &str, kind: WriteKind, target: WriteTarget<'_>) -> Result<()> {
        let role = self.roles.get(actor)?;
        if role.check_write(&self.graph, kind, target)?.is_allowed() {
            Ok(())
        } else {
            Err(denied("write", actor))
        }
    }

    /// Role edits need control, and write on the graph as well: a role
    /// denied writes could otherwise mint an unrestricted role and use it.
    fn require_control(&self, actor: &str) -> Result<()> {
        if !self.roles.get(actor)?.has_control() {
            return Err(denied("control", actor));
        }
        self.require_write(actor, WriteKind::Modify, WriteTarget::Graph)
    }

    pub fn view(&self, actor: &str) -> Result<View> {
        Ok(view_as(&self.graph, self.roles.get(actor)?))
    }

    pub fn add_node(&mut self, actor: &str, labels: &[String], properties: Properties) -> Result<NodeId> {
        let label_set: BTreeSet<String> = labels.iter().cloned().collect();
        let target = WriteTarget::NewNode {
            labels: &label_set,
            properties: &properties,
        };
        self.require_write(actor, WriteKind::Create, target)?;
        self.graph.add_node(label_set, properties)
    }

    pub fn add_relationship(
        &mut self,
        actor: &str,
        src: NodeId,
        dst: NodeId,
        rel_type: &str,
        validity: TemporalInterval,
        properties: Properties,
    ) -> Result<RelId> {
        self.require_write(actor, WriteKind::Create, WriteTarget::NewRel { rel_type })?;
        self.graph.add_relationship(src, dst, rel_type, validity, properties)
    }

    pub fn end_relationship(&mut self, actor: &str, rel: RelId, end: PartialDate) -> Result<()> {
        self.require_write(actor, WriteKind::Modify, WriteTarget::Rel(rel))?;
        self.graph.end_relationship(rel, end).map(|_| ())
    }

    pub fn set_properties(
        &mut self,
        actor: &str,
        element: ElementId,
        updates: &BTreeMap<String, PropertyUpdate>,
    ) -> Result<()> {
        match element {
            ElementId::Node(id) => {
                self.require_write(actor, WriteKind::Modify, WriteTarget::Node(id))?;
                for key in updates.keys() {
                    self.require_write(actor, WriteKind::Modify, WriteTarget::Property(id, key))?;
                }
            }
            ElementId::Rel(id) => self.require_write(actor, WriteKind::Modify, WriteTarget::Rel(id))?,
        }
        self.graph.set_properties(element, updates).map(|_| ())
    }

    pub fn delete_node(&mut self, actor: &str, node: NodeId, cascade: bool) -> Result<usize> {
        self.require_write(actor, WriteKind::Delete, WriteTarget::Node(node))?;
        if cascade {
            for rel in self.graph.incident(node) {
                self.require_write(actor, WriteKind::Delete, WriteTarget::Rel(rel))?;
            }
        }
        self.graph.delete_node(node, cascade)
    }

    pub fn set_external_link(&mut self, actor: &str, node: NodeId, source: LinkSource, uri: &str) -> Result<()> {
        self.require_write(actor, WriteKind::Modify, WriteTarget::Node(node))?;
        self.graph.set_external_link(node, source, uri).map(|_| ())
    }

    pub fn submit_candidates(&mut self, actor: &str, candidates: &[CandidateTriple]) -> Result<SubmitReport> {
        self.require_write(actor, WriteKind::Create, WriteTarget::Graph)?;
        ingest::submit_candidates(&mut self.graph, &mut self.inbox, &self.thresholds, &self.registry, candidates)
    }

    pub fn import_triples(&mut self, actor: &str, path: &Path) -> Result<SubmitReport> {
        self.require_write(actor, WriteKind::Create, WriteTarget::Graph)?;
        ingest::import_triples(&mut self.graph, &mut self.inbox, &self.thresholds, &self.registry, path)
    }

    /// Imports a BibTeX file, matching authors against the owner's name.
    pub fn import_bibtex(&mut self, actor: &str, path: &Path) -> Result<BibReport> {
        self.require_write(actor, WriteKind::Create, WriteTarget::Graph)?;
        let owner_name = self
            .graph
            .node(self.graph.owner())
            .and_then(|n| n.name())
            .unwrap_or_default()
            .to_string();
        ingest::import_bibtex(&mut self.graph, path, &owner_name)
    }

    pub fn inbox_accept(&mut self, actor: &str, id: u64, decided_at: Option<PartialDate>) -> Result<MergeReport> {
        self.require_write(actor, WriteKind::Create, WriteTarget::Graph)?;
        self.inbox.accept(&mut self.graph, &self.registry, id, decided_at)
    }

    pub fn inbox_reject(&mut self, actor: &str, id: u64, decided_at: Option<PartialDate>) -> Result<()> {
        self.require_write(actor, WriteKind::Modify, WriteTarget::Graph)?;
        self.inbox.reject(id, decided_at).map(|_| ())
    }

    pub fn create_role(&mut self, actor: &str, name: &str) -> Result<()> {
        self.require_control(actor)?;
        self.roles.create_role(name).map(|_| ())
    }

    pub fn copy_role(&mut self, actor: &str, new_name: &str, from: &str) -> Result<()> {
        self.require_control(actor)?;
        self.roles.copy_role(new_name, from).map(|_| ())
    }

    pub fn add_rule(&mut self, actor: &str, role: &str, rule: AccessRule) -> Result<()> {
        self.require_control(actor)?;
        self.roles.add_rule(role, rule).map(|_| ())
    }

    /// Parses and runs a query; its `AS` clause overrides `actor`.
    pub fn query(&self, actor: &str, text: &str) -> Result<Vec<Row>> {
        let q = query::parse_query(text)?;
        query::evaluate_as(&self.graph, &self.roles, &q, actor)
    }

    /// Validation restricted to what `actor` can see.
    pub fn validate(&self, actor: &str) -> Result<ValidationReport> {
        let view = self.view(actor)?;
        Ok(self
            .graph
            .validate_subset(&self.registry, |n| view.has_node(n), |r| view.has_rel(r)))
    }
}

//! The owner-centric labeled property graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::Registry;
use crate::temporal::{PartialDate, TemporalInterval};
use crate::value::{validate_properties, Properties, PropertyUpdate, PropertyValue};

pub const OWNER_LABEL: &str = "Researcher";

macro_rules! id_type {
    ($name:ident, $what:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                s.trim()
                    .parse()
                    .map($name)
                    .map_err(|_| Error::invalid(format!("malformed {} id {s:?}", $what)))
            }
        }
    };
}

id_type!(NodeId, "node");
id_type!(RelId, "relationship");

/// Either kind of graph element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementId {
    Node(NodeId),
    Rel(RelId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkSource {
    Wikidata,
    Orkg,
    Twitter,
    Other,
}

impl LinkSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinkSource::Wikidata => "wikidata",
            LinkSource::Orkg => "orkg",
            LinkSource::Twitter => "twitter",
            LinkSource::Other => "other",
        }
    }
}

impl FromStr for LinkSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wikidata" => Ok(LinkSource::Wikidata),
            "orkg" => Ok(LinkSource::Orkg),
            "twitter" => Ok(LinkSource::Twitter),
            "other" => Ok(LinkSource::Other),
            _ => Err(Error::invalid(format!(
                "unknown link source {s:?} (expected wikidata, orkg, twitter or other)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalLink {
    pub source: LinkSource,
    pub uri: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub labels: BTreeSet<String>,
    pub properties: Properties,
    pub external_links: Vec<ExternalLink>,
}

impl Node {
    pub fn has_label(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn name(&self) -> Option<&str> {
        self.properties.get("name").and_then(PropertyValue::as_text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relationship {
    pub id: RelId,
    pub src: NodeId,
    pub dst: NodeId,
    pub rel_type: String,
    pub validity: TemporalInterval,
    pub properties: Properties,
}

impl Relationship {
    pub fn is_valid_at(&self, t: PartialDate) -> bool {
        self.validity.is_valid_at(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
    Both,
}

/// Result of [`Graph::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub orphans: Vec<NodeId>,
    pub schema_warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.orphans.is_empty() && self.schema_warnings.is_empty()
    }
}

/// Checks that `token` is non-empty and free of whitespace.
pub(crate) fn check_token(what: &str, token: &str) -> Result<()> {
    if token.is_empty() || token.chars().any(char::is_whitespace) {
        return Err(Error::invalid(format!(
            "{what} {token:?} must be a non-empty token without whitespace"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    owner: NodeId,
    nodes: BTreeMap<NodeId, Node>,
    relationships: BTreeMap<RelId, Relationship>,
    next_id: u64,
}

impl Graph {
    /// Creates a graph holding only the owner's `Researcher` node.
    pub fn new(owner_name: &str) -> Result<Self> {
        if owner_name.trim().is_empty() {
            return Err(Error::invalid("owner name must be non-empty"));
        }
        let owner = NodeId(1);
        let node = Node {
            id: owner,
            labels: BTreeSet::from([OWNER_LABEL.to_string()]),
            properties: Properties::from([("name".to_string(), PropertyValue::text(owner_name))]),
            external_links: Vec::new(),
        };
        Ok(Graph {
            owner,
            nodes: BTreeMap::from([(owner, node)]),
            relationships: BTreeMap::new(),
            next_id: 2,
        })
    }

    /// Reassembles a graph from stored parts, checking every structural
    /// invariant. Used when loading snapshots.
    pub fn from_parts(
        owner: NodeId,
        nodes: Vec<Node>,
        relationships: Vec<Relationship>,
        next_id: u64,
    ) -> Result<Self> {
        let integrity = |record: String, message: String| Error::Integrity { record, message };
        let mut node_map = BTreeMap::new();
        for node in nodes {
            let record = format!("node {}", node.id);
            if node.labels.is_empty() {
                return Err(integrity(record, "no labels".into()));
            }
            for label in &node.labels {
                check_token("label", label).map_err(|e| integrity(record.clone(), e.to_string()))?;
            }
            validate_properties(&node.properties).map_err(|e| integrity(record.clone(), e.to_string()))?;
            for link in &node.external_links {
                crate::schema::check_absolute_uri(&link.uri)
                    .map_err(|e| integrity(record.clone(), e.to_string()))?;
            }
            if node.id.0 >= next_id {
                return Err(integrity(record, format!("id not below next_id {next_id}")));
            }
            if node_map.insert(node.id, node).is_some() {
                return Err(integrity(record, "duplicate id".into()));
            }
        }
        match node_map.get(&owner) {
            Some(n) if n.has_label(OWNER_LABEL) => {}
            Some(_) => return Err(integrity(format!("node {owner}"), "owner is not a Researcher".into())),
            None => return Err(integrity(format!("node {owner}"), "owner node missing".into())),
        }
        let mut rel_map = BTreeMap::new();
        for rel in relationships {
            let record = format!("relationship {}", rel.id);
            for end in [rel.src, rel.dst] {
                if !node_map.contains_key(&end) {
                    return Err(integrity(record, format!("dangling endpoint {end}")));
                }
            }
            check_token("relationship type", &rel.rel_type)
                .map_err(|e| integrity(record.clone(), e.to_string()))?;
            rel.validity.check().map_err(|e| integrity(record.clone(), e.to_string()))?;
            validate_properties(&rel.properties).map_err(|e| integrity(record.clone(), e.to_string()))?;
            if rel.id.0 >= next_id || node_map.contains_key(&NodeId(rel.id.0)) {
                return Err(integrity(record, "id collides or is not below next_id".into()));
            }
            if rel_map.insert(rel.id, rel).is_some() {
                return Err(integrity(record, "duplicate id".into()));
            }
        }
        Ok(Graph {
            owner,
            nodes: node_map,
            relationships: rel_map,
            next_id,
        })
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn relationship(&self, id: RelId) -> Option<&Relationship> {
        self.relationships.get(&id)
    }

    pub fn node_or_err(&self, id: NodeId) -> Result<&Node> {
        self.nodes
            .get(&id)
            .ok_or_else(|| Error::not_found(format!("node {id}")))
    }

    pub fn relationship_or_err(&self, id: RelId) -> Result<&Relationship> {
        self.relationships
            .get(&id)
            .ok_or_else(|| Error::not_found(format!("relationship {id}")))
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    /// Relationships in id order.
    pub fn relationships(&self) -> impl Iterator<Item = &Relationship> {
        self.relationships.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn relationship_count(&self) -> usize {
        self.relationships.len()
    }

    pub fn contains(&self, id: ElementId) -> bool {
        match id {
            ElementId::Node(n) => self.nodes.contains_key(&n),
            ElementId::Rel(r) => self.relationships.contains_key(&r),
        }
    }

    /// Lowest-id node carrying `label` whose `name` equals `name` ignoring case.
    pub fn find_by_name(&self, label: &str, name: &str) -> Option<&Node> {
        let wanted = name.to_lowercase();
        self.nodes
            .values()
            .find(|n| n.has_label(label) && n.name().is_some_and(|v| v.to_lowercase() == wanted))
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> Result<&mut Node> {
        self.nodes
            .get_mut(&id)
            .ok_or_else(|| Error::not_found(format!("node {id}")))
    }

    pub fn add_node<L, S>(&mut self, labels: L, properties: Properties) -> Result<NodeId>
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::invalid("a node needs at least one label"));
        }
        for label in &labels {
            check_token("label", label)?;
        }
        validate_properties(&properties)?;
        let id = NodeId(self.fresh_id());
        self.nodes.insert(
            id,
            Node {
                id,
                labels,
                properties,
                external_links: Vec::new(),
            },
        );
        Ok(id)
    }

    /// Returns the existing relationship identical to the proposed one, if any.
    pub fn find_duplicate(
        &self,
        src: NodeId,
        dst: NodeId,
        rel_type: &str,
        validity: &TemporalInterval,
    ) -> Option<&Relationship> {
        self.relationships.values().find(|r| {
            r.src == src && r.dst == dst && r.rel_type == rel_type && r.validity == *validity
        })
    }

    pub fn add_relationship(
        &mut self,
        src: NodeId,
        dst: NodeId,
        rel_type: &str,
        validity: TemporalInterval,
        properties: Properties,
    ) -> Result<RelId> {
        self.node_or_err(src)?;
        self.node_or_err(dst)?;
        check_token("relationship type", rel_type)?;
        validity.check()?;
        validate_properties(&properties)?;
        if let Some(existing) = self.find_duplicate(src, dst, rel_type, &validity) {
            return Err(Error::conflict(format!(
                "relationship {} already links {src} -{rel_type}-> {dst} over {validity}",
                existing.id
            )));
        }
        let id = RelId(self.fresh_id());
        self.relationships.insert(
            id,
            Relationship {
                id,
                src,
                dst,
                rel_type: rel_type.to_string(),
                validity,
                properties,
            },
        );
        Ok(id)
    }

    /// Closes an open-ended relationship.
    pub fn end_relationship(&mut self, id: RelId, end: PartialDate) -> Result<&Relationship> {
        let rel = self.relationship_or_err(id)?;
        if let Some(existing) = rel.validity.end {
            return Err(Error::conflict(format!("relationship {id} already ended at {existing}")));
        }
        let validity = TemporalInterval::new(rel.validity.start, Some(end))?;
        if let Some(dup) = self.find_duplicate(rel.src, rel.dst, &rel.rel_type, &validity) {
            return Err(Error::conflict(format!(
                "ending relationship {id} would duplicate relationship {}",
                dup.id
            )));
        }
        let rel = self.relationships.get_mut(&id).expect("checked above");
        rel.validity = validity;
        Ok(rel)
    }

    pub fn set_properties(
        &mut self,
        element: ElementId,
        updates: &BTreeMap<String, PropertyUpdate>,
    ) -> Result<&Properties> {
        for (key, update) in updates {
            if key.is_empty() {
                return Err(Error::invalid("property key must be non-empty"));
            }
            if let PropertyUpdate::Set(v) = update {
                v.validate()
                    .map_err(|e| Error::invalid(format!("property {key:?}: {e}")))?;
            }
        }
        let target = match element {
            ElementId::Node(id) => &mut self.node_mut(id)?.properties,
            ElementId::Rel(id) => {
                &mut self
                    .relationships
                    .get_mut(&id)
                    .ok_or_else(|| Error::not_found(format!("relationship {id}")))?
                    .properties
            }
        };
        for (key, update) in updates {
            match update {
                PropertyUpdate::Set(v) => {
                    target.insert(key.clone(), v.clone());
                }
                PropertyUpdate::Unset => {
                    target.remove(key);
                }
            }
        }
        Ok(target)
    }

    /// Ids of relationships touching `node`, in id order.
    pub fn incident(&self, node: NodeId) -> Vec<RelId> {
        self.relationships
            .values()
            .filter(|r| r.src == node || r.dst == node)
            .map(|r| r.id)
            .collect()
    }

    /// Deletes a node. Without `cascade` the node must have no relationships.
    /// Returns the number of removed elements.
    pub fn delete_node(&mut self, id: NodeId, cascade: bool) -> Result<usize> {
        self.node_or_err(id)?;
        if id == self.owner {
            return Err(Error::Forbidden("the owner node cannot be deleted".into()));
        }
        let incident = self.incident(id);
        if !cascade && !incident.is_empty() {
            return Err(Error::conflict(format!(
                "node {id} has {} relationship(s); use cascade",
                incident.len()
            )));
        }
        for rel in &incident {
            self.relationships.remove(rel);
        }
        self.nodes.remove(&id);
        Ok(incident.len() + 1)
    }

    pub fn delete_relationship(&mut self, id: RelId) -> Result<Relationship> {
        self.relationships
            .remove(&id)
            .ok_or_else(|| Error::not_found(format!("relationship {id}")))
    }

    /// Relationships around `node` with the node at the other end, ordered by
    /// relationship id. Self loops are reported once.
    pub fn neighbors(
        &self,
        node: NodeId,
        direction: Direction,
        rel_type: Option<&str>,
        at: Option<PartialDate>,
    ) -> Result<Vec<(&Relationship, &Node)>> {
        self.node_or_err(node)?;
        let out = self
            .relationships
            .values()
            .filter(|r| rel_type.is_none_or(|t| r.rel_type == t))
            .filter(|r| at.is_none_or(|t| r.is_valid_at(t)))
            .filter_map(|r| {
                let other = match direction {
                    Direction::Out if r.src == node => r.dst,
                    Direction::In if r.dst == node => r.src,
                    Direction::Both if r.src == node => r.dst,
                    Direction::Both if r.dst == node => r.src,
                    _ => return None,
                };
                Some((r, &self.nodes[&other]))
            })
            .collect();
        Ok(out)
    }

    /// Nodes with no undirected path to the owner, in id order.
    pub fn orphans(&self) -> Vec<NodeId> {
        let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for r in self.relationships.values() {
            adjacency.entry(r.src).or_default().push(r.dst);
            adjacency.entry(r.dst).or_default().push(r.src);
        }
        let mut seen = BTreeSet::from([self.owner]);
        let mut queue = VecDeque::from([self.owner]);
        while let Some(n) = queue.pop_front() {
            for &m in adjacency.get(&n).into_iter().flatten() {
                if seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        self.nodes.keys().filter(|id| !seen.contains(id)).copied().collect()
    }

    /// Reports orphans and advisory schema warnings. Never mutates.
    pub fn validate(&self, registry: &Registry) -> ValidationReport {
        self.validate_subset(registry, |_| true, |_| true)
    }

    /// Like [`Graph::validate`], keeping only the orphans and relationship
    /// warnings that pass the given filters.
    pub fn validate_subset(
        &self,
        registry: &Registry,
        keep_node: impl Fn(NodeId) -> bool,
        keep_rel: impl Fn(RelId) -> bool,
    ) -> ValidationReport {
        let schema_warnings = self
            .relationships
            .values()
            .filter(|r| keep_rel(r.id))
            .flat_map(|r| {
                let src = &self.nodes[&r.src].labels;
                let dst = &self.nodes[&r.dst].labels;
                registry
                    .check_triple(src, &r.rel_type, dst)
                    .into_iter()
                    .map(move |w| format!("relationship {}: {w}", r.id))
            })
            .collect();
        let mut orphans = self.orphans();
        orphans.retain(|n| keep_node(*n));
        ValidationReport {
            orphans,
            schema_warnings,
        }
    }
}

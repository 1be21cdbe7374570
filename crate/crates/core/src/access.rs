//! Role-based access control over graph elements.
//!
//! A role holds an ordered list of grant/deny rules. Resolution gathers all
//! rules whose scope matches an element: any matching deny wins, otherwise
//! any matching grant allows, otherwise access is denied.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_token, Graph, Node, NodeId, RelId, Relationship};
use crate::value::{Properties, PropertyValue};

pub const ADMIN: &str = "admin";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Privilege {
    Read,
    Traverse,
    Write,
    Append,
    Control,
}

impl Privilege {
    pub const ALL: [Privilege; 5] = [
        Privilege::Read,
        Privilege::Traverse,
        Privilege::Write,
        Privilege::Append,
        Privilege::Control,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Privilege::Read => "read",
            Privilege::Traverse => "traverse",
            Privilege::Write => "write",
            Privilege::Append => "append",
            Privilege::Control => "control",
        }
    }
}

impl fmt::Display for Privilege {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Privilege {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Privilege::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            // MATCH is the read privilege under another name
            .or_else(|| s.eq_ignore_ascii_case("match").then_some(Privilege::Read))
            .ok_or_else(|| Error::invalid(format!("unknown privilege {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Effect {
    Grant,
    Deny,
}

/// The part of the graph a rule applies to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scope {
    Graph,
    NodeLabel { label: String },
    RelType { name: String },
    Node { id: NodeId },
    NodeProperty { label: String, key: String },
    PropertyPredicate {
        label: String,
        key: String,
        values: BTreeSet<String>,
    },
}

impl Scope {
    pub fn check(&self) -> Result<()> {
        match self {
            Scope::PropertyPredicate { values, .. } if values.is_empty() => {
                Err(Error::invalid("property predicate needs at least one value"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Graph => f.write_str("graph"),
            Scope::NodeLabel { label } => write!(f, "node-label {label}"),
            Scope::RelType { name } => write!(f, "rel-type {name}"),
            Scope::Node { id } => write!(f, "node {id}"),
            Scope::NodeProperty { label, key } => write!(f, "prop {label} {key}"),
            Scope::PropertyPredicate { label, key, values } => {
                let values: Vec<&str> = values.iter().map(String::as_str).collect();
                write!(f, "prop-pred {label} {key} {}", values.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AccessRule {
    pub effect: Effect,
    pub privilege: Privilege,
    pub scope: Scope,
}

impl AccessRule {
    pub fn grant(privilege: Privilege, scope: Scope) -> Self {
        AccessRule {
            effect: Effect::Grant,
            privilege,
            scope,
        }
    }

    pub fn deny(privilege: Privilege, scope: Scope) -> Self {
        AccessRule {
            effect: Effect::Deny,
            privilege,
            scope,
        }
    }
}

impl fmt::Display for AccessRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let effect = match self.effect {
            Effect::Grant => "grant",
            Effect::Deny => "deny",
        };
        write!(f, "{effect} {} {}", self.privilege, self.scope)
    }
}

/// An element whose access is being decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element<'a> {
    Node(NodeId),
    Rel(RelId),
    Property(NodeId, &'a str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Allowed,
    Denied,
}

impl Decision {
    pub fn is_allowed(self) -> bool {
        self == Decision::Allowed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteKind {
    Create,
    Modify,
    Delete,
}

/// What a mutation touches. `NewNode` and `NewRel` describe elements that do
/// not exist yet.
#[derive(Debug, Clone, Copy)]
pub enum WriteTarget<'a> {
    Graph,
    Node(NodeId),
    Rel(RelId),
    Property(NodeId, &'a str),
    NewNode {
        labels: &'a BTreeSet<String>,
        properties: &'a Properties,
    },
    NewRel {
        rel_type: &'a str,
    },
}

/// Element facts that scopes are matched against.
enum Facts<'a> {
    Graph,
    Node {
        id: Option<NodeId>,
        labels: &'a BTreeSet<String>,
        properties: &'a Properties,
        key: Option<&'a str>,
    },
    Rel {
        rel_type: &'a str,
    },
}

impl<'a> Facts<'a> {
    fn of_node(node: &'a Node, key: Option<&'a str>) -> Self {
        Facts::Node {
            id: Some(node.id),
            labels: &node.labels,
            properties: &node.properties,
            key,
        }
    }

    fn of_rel(rel: &'a Relationship) -> Self {
        Facts::Rel {
            rel_type: &rel.rel_type,
        }
    }
}

fn predicate_holds(properties: &Properties, key: &str, values: &BTreeSet<String>) -> bool {
    match properties.get(key) {
        Some(PropertyValue::Decimal(_)) | Some(PropertyValue::List(_)) | None => false,
        Some(v) => values.contains(&v.to_string()),
    }
}

impl Scope {
    fn matches(&self, facts: &Facts<'_>) -> bool {
        match (self, facts) {
            (Scope::Graph, _) => true,
            (Scope::NodeLabel { label }, Facts::Node { labels, .. }) => labels.contains(label),
            (Scope::RelType { name }, Facts::Rel { rel_type }) => name == rel_type,
            (Scope::Node { id }, Facts::Node { id: Some(n), .. }) => id == n,
            (Scope::NodeProperty { label, key }, Facts::Node { labels, key: Some(k), .. }) => {
                labels.contains(label) && key == k
            }
            (
                Scope::PropertyPredicate { label, key, values },
                Facts::Node {
                    labels, properties, ..
                },
            ) => labels.contains(label) && predicate_holds(properties, key, values),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Role {
    pub name: String,
    pub rules: Vec<AccessRule>,
}

impl Role {
    pub fn new(name: &str) -> Self {
        Role {
            name: name.to_string(),
            rules: Vec::new(),
        }
    }

    fn admin() -> Self {
        Role {
            name: ADMIN.to_string(),
            rules: Privilege::ALL
                .into_iter()
                .map(|p| AccessRule::grant(p, Scope::Graph))
                .collect(),
        }
    }

    fn decide(&self, privileges: &[Privilege], facts: &Facts<'_>) -> Decision {
        let mut matching = self
            .rules
            .iter()
            .filter(|r| privileges.contains(&r.privilege) && r.scope.matches(facts));
        let mut granted = false;
        for rule in matching.by_ref() {
            match rule.effect {
                Effect::Deny => return Decision::Denied,
                Effect::Grant => granted = true,
            }
        }
        if granted {
            Decision::Allowed
        } else {
            Decision::Denied
        }
    }

    /// Decides `privilege` on an existing element of `graph`.
    pub fn resolve(&self, graph: &Graph, privilege: Privilege, element: Element<'_>) -> Result<Decision> {
        let facts = match element {
            Element::Node(id) => Facts::of_node(graph.node_or_err(id)?, None),
            Element::Property(id, key) => Facts::of_node(graph.node_or_err(id)?, Some(key)),
            Element::Rel(id) => Facts::of_rel(graph.relationship_or_err(id)?),
        };
        Ok(self.decide(&[privilege], &facts))
    }

    /// Whether this role may edit the role table.
    pub fn has_control(&self) -> bool {
        self.decide(&[Privilege::Control], &Facts::Graph).is_allowed()
    }

    /// Write grants cover every mutation kind; append grants cover creation
    /// only. A deny on write blocks everything, a deny on append blocks creation.
    pub fn check_write(&self, graph: &Graph, kind: WriteKind, target: WriteTarget<'_>) -> Result<Decision> {
        let facts = match target {
            WriteTarget::Graph => Facts::Graph,
            WriteTarget::Node(id) => Facts::of_node(graph.node_or_err(id)?, None),
            WriteTarget::Property(id, key) => Facts::of_node(graph.node_or_err(id)?, Some(key)),
            WriteTarget::Rel(id) => Facts::of_rel(graph.relationship_or_err(id)?),
            WriteTarget::NewNode { labels, properties } => Facts::Node {
                id: None,
                labels,
                properties,
                key: None,
            },
            WriteTarget::NewRel { rel_type } => Facts::Rel { rel_type },
        };
        let privileges: &[Privilege] = match kind {
            WriteKind::Create => &[Privilege::Write, Privilege::Append],
            WriteKind::Modify | WriteKind::Delete => &[Privilege::Write],
        };
        Ok(self.decide(privileges, &facts))
    }
}

/// The roles of one graph. Always contains the built-in `admin` role, which
/// is granted everything and cannot be edited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleTable {
    roles: BTreeMap<String, Role>,
}

impl Default for RoleTable {
    fn default() -> Self {
        Self::new()
    }
}

impl RoleTable {
    pub fn new() -> Self {
        RoleTable {
            roles: BTreeMap::from([(ADMIN.to_string(), Role::admin())]),
        }
    }

    /// Rebuilds a table from stored roles. The stored `admin` role must be
    /// the built-in one.
    pub fn from_roles(roles: Vec<Role>) -> Result<Self> {
        let mut table = BTreeMap::new();
        for role in roles {
            let record = format!("role {}", role.name);
            check_token("role name", &role.name).map_err(|e| Error::Integrity {
                record: record.clone(),
                message: e.to_string(),
            })?;
            for rule in &role.rules {
                rule.scope.check().map_err(|e| Error::Integrity {
                    record: record.clone(),
                    message: e.to_string(),
                })?;
            }
            if role.name == ADMIN && role != Role::admin() {
                return Err(Error::Integrity {
                    record,
                    message: "admin role must grant everything".into(),
                });
            }
            if table.insert(role.name.clone(), role).is_some() {
                return Err(Error::Integrity {
                    record,
                    message: "duplicate role".into(),
                });
            }
        }
        table.entry(ADMIN.to_string()).or_insert_with(Role::admin);
        Ok(RoleTable { roles: table })
    }

    pub fn get(&self, name: &str) -> Result<&Role> {
        self.roles
            .get(name)
            .ok_or_else(|| Error::not_found(format!("role {name}")))
    }

    /// Roles ordered by name.
    pub fn roles(&self) -> impl Iterator<Item = &Role> {
        self.roles.values()
    }

    fn check_new_name(&self, name: &str) -> Result<()> {
        check_token("role name", name)?;
        if self.roles.contains_key(name) {
            return Err(Error::conflict(format!("role {name} already exists")));
        }
        Ok(())
    }

    /// Creates a role with no rules, which therefore sees nothing.
    pub fn create_role(&mut self, name: &str) -> Result<&Role> {
        self.check_new_name(name)?;
        Ok(self
            .roles
            .entry(name.to_string())
            .or_insert_with(|| Role::new(name)))
    }

    /// Creates `new_name` with a copy of the rules of `from`.
    pub fn copy_role(&mut self, new_name: &str, from: &str) -> Result<&Role> {
        let rules = self.get(from)?.rules.clone();
        self.check_new_name(new_name)?;
        Ok(self.roles.entry(new_name.to_string()).or_insert(Role {
            name: new_name.to_string(),
            rules,
        }))
    }

    pub fn add_rule(&mut self, role: &str, rule: AccessRule) -> Result<&Role> {
        rule.scope.check()?;
        if role == ADMIN {
            return Err(Error::Forbidden("the admin role cannot be edited".into()));
        }
        let r = self
            .roles
            .get_mut(role)
            .ok_or_else(|| Error::not_found(format!("role {role}")))?;
        r.rules.push(rule);
        Ok(r)
    }
}

/// The subgraph visible to a role.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct View {
    pub nodes: BTreeSet<NodeId>,
    pub masked: BTreeMap<NodeId, BTreeSet<String>>,
    pub relationships: BTreeSet<RelId>,
}

impl View {
    /// A view showing the entire graph.
    pub fn full(graph: &Graph) -> Self {
        View {
            nodes: graph.nodes().map(|n| n.id).collect(),
            masked: BTreeMap::new(),
            relationships: graph.relationships().map(|r| r.id).collect(),
        }
    }

    pub fn has_node(&self, id: NodeId) -> bool {
        self.nodes.contains(&id)
    }

    pub fn has_rel(&self, id: RelId) -> bool {
        self.relationships.contains(&id)
    }

    pub fn is_masked(&self, node: NodeId, key: &str) -> bool {
        self.masked.get(&node).is_some_and(|keys| keys.contains(key))
    }

    /// Looks up a node property as seen through the view.
    pub fn node_property<'g>(&self, node: &'g Node, key: &str) -> Option<&'g PropertyValue> {
        if self.is_masked(node.id, key) {
            None
        } else {
            node.properties.get(key)
        }
    }

    /// Unmasked properties of a node.
    pub fn visible_properties<'g>(&'g self, node: &'g Node) -> impl Iterator<Item = (&'g String, &'g PropertyValue)> {
        node.properties
            .iter()
            .filter(move |(k, _)| !self.is_masked(node.id, k))
    }
}

/// Computes the elements `role` can see. Relationships need traverse access
/// and both endpoints visible; nodes are not pruned for being disconnected.
pub fn view_as(graph: &Graph, role: &Role) -> View {
    let mut view = View::default();
    for node in graph.nodes() {
        if !role.decide(&[Privilege::Read], &Facts::of_node(node, None)).is_allowed() {
            continue;
        }
        view.nodes.insert(node.id);
        let masked: BTreeSet<String> = node
            .properties
            .keys()
            .filter(|k| !role.decide(&[Privilege::Read], &Facts::of_node(node, Some(k))).is_allowed())
            .cloned()
            .collect();
        if !masked.is_empty() {
            view.masked.insert(node.id, masked);
        }
    }
    for rel in graph.relationships() {
        if view.has_node(rel.src)
            && view.has_node(rel.dst)
            && role.decide(&[Privilege::Traverse], &Facts::of_rel(rel)).is_allowed()
        {
            view.relationships.insert(rel.id);
        }
    }
    view
}

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::ser::{Serialize, SerializeMap, Serializer};

use super::ast::{EdgeDirection, EdgePattern, Literal, NodePattern, Query};
use crate::access::{view_as, RoleTable, View, ADMIN};
use crate::error::Result;
use crate::graph::{ElementId, Graph, Node, NodeId, RelId, Relationship};
use crate::value::{Properties, PropertyValue};

/// One returned value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Node(NodeId),
    Rel(RelId),
    Property(PropertyValue),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Node(id) => write!(f, "({id})"),
            Value::Rel(id) => write!(f, "[{id}]"),
            Value::Property(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Null => s.serialize_none(),
            Value::Node(id) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("node", id)?;
                m.end()
            }
            Value::Rel(id) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("rel", id)?;
                m.end()
            }
            Value::Property(v) => match v {
                PropertyValue::Text(t) => s.serialize_str(t),
                PropertyValue::Integer(i) => s.serialize_i64(*i),
                PropertyValue::Decimal(x) => s.serialize_f64(*x),
                PropertyValue::Boolean(b) => s.serialize_bool(*b),
                PropertyValue::Date(d) => s.collect_str(d),
                PropertyValue::List(items) => items.serialize(s),
            },
        }
    }
}

pub type Row = Vec<Value>;

fn literal_matches(value: Option<&PropertyValue>, literal: &Literal) -> bool {
    match (value, literal) {
        (Some(PropertyValue::Text(a)), Literal::Str(b)) => a == b,
        (Some(PropertyValue::Integer(a)), Literal::Int(b)) => a == b,
        (Some(PropertyValue::Boolean(a)), Literal::Bool(b)) => a == b,
        _ => false,
    }
}

struct Matcher<'a> {
    graph: &'a Graph,
    view: &'a View,
    query: &'a Query,
    /// Visible relationships keyed by the node they leave from, in id order.
    outgoing: BTreeMap<NodeId, Vec<&'a Relationship>>,
    incoming: BTreeMap<NodeId, Vec<&'a Relationship>>,
    bindings: BTreeMap<&'a str, ElementId>,
    path: Vec<ElementId>,
    found: Vec<(Vec<ElementId>, BTreeMap<&'a str, ElementId>)>,
}

impl<'a> Matcher<'a> {
    fn node_fits(&self, node: &Node, pat: &NodePattern) -> bool {
        pat.label.as_ref().is_none_or(|l| node.has_label(l))
            && pat
                .props
                .iter()
                .all(|(k, lit)| literal_matches(self.view.node_property(node, k), lit))
    }

    fn rel_fits(&self, rel: &Relationship, pat: &EdgePattern) -> bool {
        pat.rel_type.as_ref().is_none_or(|t| &rel.rel_type == t)
            && self.query.at.is_none_or(|t| rel.is_valid_at(t))
            && props_match(&rel.properties, &pat.props)
    }

    /// Binds `var` to `id` unless it is already bound elsewhere. Returns
    /// whether the binding is consistent and whether it was newly made.
    fn bind(&mut self, var: Option<&'a str>, id: ElementId) -> Option<bool> {
        let Some(var) = var else { return Some(false) };
        match self.bindings.get(var) {
            Some(existing) if *existing == id => Some(false),
            Some(_) => None,
            None => {
                self.bindings.insert(var, id);
                Some(true)
            }
        }
    }

    fn unbind(&mut self, var: Option<&'a str>, fresh: bool) {
        if let (Some(var), true) = (var, fresh) {
            self.bindings.remove(var);
        }
    }

    fn visit_node(&mut self, node: &'a Node, pat: &'a NodePattern, hop: usize) {
        if !self.node_fits(node, pat) {
            return;
        }
        let var = pat.var.as_deref();
        let Some(fresh) = self.bind(var, ElementId::Node(node.id)) else {
            return;
        };
        self.path.push(ElementId::Node(node.id));
        if hop == self.query.hops.len() {
            self.found.push((self.path.clone(), self.bindings.clone()));
        } else {
            self.extend(node.id, hop);
        }
        self.path.pop();
        self.unbind(var, fresh);
    }

    fn extend(&mut self, from: NodeId, hop: usize) {
        let (edge, next) = &self.query.hops[hop];
        let candidates = match edge.direction {
            EdgeDirection::Outgoing => self.outgoing.get(&from),
            EdgeDirection::Incoming => self.incoming.get(&from),
        }
        .cloned()
        .unwrap_or_default();
        for rel in candidates {
            if !self.rel_fits(rel, edge) {
                continue;
            }
            let var = edge.var.as_deref();
            let Some(fresh) = self.bind(var, ElementId::Rel(rel.id)) else {
                continue;
            };
            let other = match edge.direction {
                EdgeDirection::Outgoing => rel.dst,
                EdgeDirection::Incoming => rel.src,
            };
            self.path.push(ElementId::Rel(rel.id));
            let graph = self.graph;
            self.visit_node(graph.node(other).expect("view endpoints exist"), next, hop + 1);
            self.path.pop();
            self.unbind(var, fresh);
        }
    }
}

fn props_match(props: &Properties, wanted: &[(String, Literal)]) -> bool {
    wanted.iter().all(|(k, lit)| literal_matches(props.get(k), lit))
}

fn project(graph: &Graph, view: &View, query: &Query, bindings: &BTreeMap<&str, ElementId>) -> Row {
    query
        .returns
        .iter()
        .map(|item| {
            let bound = bindings[item.var.as_str()];
            match (&item.key, bound) {
                (None, ElementId::Node(id)) => Value::Node(id),
                (None, ElementId::Rel(id)) => Value::Rel(id),
                (Some(key), ElementId::Node(id)) => graph
                    .node(id)
                    .and_then(|n| view.node_property(n, key))
                    .cloned()
                    .map_or(Value::Null, Value::Property),
                (Some(key), ElementId::Rel(id)) => graph
                    .relationship(id)
                    .and_then(|r| r.properties.get(key))
                    .cloned()
                    .map_or(Value::Null, Value::Property),
            }
        })
        .collect()
}

/// Evaluates `query` against the part of `graph` visible to its role.
///
/// The role is the query's `AS` clause, else `default_role`. Rows come out
/// ordered by the ids of the matched elements along the path; rows with
/// identical returned values are collapsed to the first.
pub fn evaluate_as(graph: &Graph, roles: &RoleTable, query: &Query, default_role: &str) -> Result<Vec<Row>> {
    let role = roles.get(query.as_role.as_deref().unwrap_or(default_role))?;
    let view = view_as(graph, role);
    Ok(evaluate_in_view(graph, &view, query))
}

/// Evaluates with `admin` as the default role.
pub fn evaluate(graph: &Graph, roles: &RoleTable, query: &Query) -> Result<Vec<Row>> {
    evaluate_as(graph, roles, query, ADMIN)
}

/// Evaluates `query` over an already computed view, ignoring its `AS` clause.
pub fn evaluate_in_view(graph: &Graph, view: &View, query: &Query) -> Vec<Row> {
    let mut outgoing: BTreeMap<NodeId, Vec<&Relationship>> = BTreeMap::new();
    let mut incoming: BTreeMap<NodeId, Vec<&Relationship>> = BTreeMap::new();
    for rel in graph.relationships().filter(|r| view.has_rel(r.id)) {
        outgoing.entry(rel.src).or_default().push(rel);
        incoming.entry(rel.dst).or_default().push(rel);
    }
    let mut m = Matcher {
        graph,
        view,
        query,
        outgoing,
        incoming,
        bindings: BTreeMap::new(),
        path: Vec::new(),
        found: Vec::new(),
    };
    for node in graph.nodes().filter(|n| view.has_node(n.id)) {
        m.visit_node(node, &query.start, 0);
    }
    let mut found = m.found;
    found.sort_by(|a, b| a.0.cmp(&b.0));

    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for (_, bindings) in &found {
        let row = project(graph, view, query, bindings);
        // PropertyValue is not Hash; its JSON form is a faithful key
        let key = serde_json::to_string(&row).expect("rows serialize");
        if seen.insert(key) {
            rows.push(row);
        }
    }
    rows
}

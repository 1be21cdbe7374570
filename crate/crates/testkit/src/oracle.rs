//! Slow reference implementations, written without reusing the engine's
//! own evaluation code.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, NaiveDate};

use prkg_core::query::{EdgeDirection, Literal, Query, Row, Value};
use prkg_core::{
    AccessRule, Effect, ElementId, Graph, Node, NodeId, PartialDate, Privilege, PropertyValue, Relationship, Role,
    Scope, TemporalInterval, View,
};

/// Calendar span of a partial date, computed with chrono.
pub fn span(d: PartialDate) -> (NaiveDate, NaiveDate) {
    let y = i32::from(d.year_part());
    match (d.month_part(), d.day_part()) {
        (Some(m), Some(day)) => {
            let x = NaiveDate::from_ymd_opt(y, m.into(), day.into()).expect("valid date");
            (x, x)
        }
        (Some(m), None) => {
            let first = NaiveDate::from_ymd_opt(y, m.into(), 1).unwrap();
            let next = if m == 12 {
                NaiveDate::from_ymd_opt(y + 1, 1, 1).unwrap()
            } else {
                NaiveDate::from_ymd_opt(y, u32::from(m) + 1, 1).unwrap()
            };
            (first, next.pred_opt().unwrap())
        }
        _ => (
            NaiveDate::from_ymd_opt(y, 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(y, 12, 31).unwrap(),
        ),
    }
}

/// Whether some day of `t` lies inside the interval, checked by walking
/// every day of `t`.
pub fn valid_at(interval: &TemporalInterval, t: PartialDate) -> bool {
    let lo = interval.start.map(|s| span(s).0);
    let hi = interval.end.map(|e| span(e).1);
    let (first, last) = span(t);
    first
        .iter_days()
        .take_while(|d| *d <= last)
        .any(|d| lo.is_none_or(|lo| d >= lo) && hi.is_none_or(|hi| d <= hi))
}

/// Number of days covered by a partial date.
pub fn day_count(d: PartialDate) -> i64 {
    let (a, b) = span(d);
    (b - a).num_days() + 1
}

pub fn is_leap(year: i32) -> bool {
    NaiveDate::from_ymd_opt(year, 2, 29).is_some_and(|d| d.day() == 29)
}

/// Nodes not reachable from the owner, found by relaxing edges to a fixpoint.
pub fn orphans(g: &Graph) -> BTreeSet<NodeId> {
    let mut reached = BTreeSet::from([g.owner()]);
    loop {
        let before = reached.len();
        for r in g.relationships() {
            if reached.contains(&r.src) || reached.contains(&r.dst) {
                reached.insert(r.src);
                reached.insert(r.dst);
            }
        }
        if reached.len() == before {
            break;
        }
    }
    g.nodes().map(|n| n.id).filter(|id| !reached.contains(id)).collect()
}

fn text_form(v: &PropertyValue) -> Option<String> {
    match v {
        PropertyValue::Text(s) => Some(s.clone()),
        PropertyValue::Integer(i) => Some(i.to_string()),
        PropertyValue::Boolean(b) => Some(b.to_string()),
        PropertyValue::Date(d) => Some(d.to_string()),
        PropertyValue::Decimal(_) | PropertyValue::List(_) => None,
    }
}

fn applies_to_node(scope: &Scope, node: &Node, key: Option<&str>) -> bool {
    match scope {
        Scope::Graph => true,
        Scope::NodeLabel { label } => node.labels.contains(label),
        Scope::Node { id } => *id == node.id,
        Scope::NodeProperty { label, key: k } => key == Some(k.as_str()) && node.labels.contains(label),
        Scope::PropertyPredicate { label, key: k, values } => {
            node.labels.contains(label)
                && node
                    .properties
                    .get(k)
                    .and_then(text_form)
                    .is_some_and(|s| values.contains(&s))
        }
        Scope::RelType { .. } => false,
    }
}

fn applies_to_rel(scope: &Scope, rel: &Relationship) -> bool {
    match scope {
        Scope::Graph => true,
        Scope::RelType { name } => *name == rel.rel_type,
        _ => false,
    }
}

fn allowed(rules: &[AccessRule], privilege: Privilege, applies: impl Fn(&Scope) -> bool) -> bool {
    let hits: Vec<&AccessRule> = rules
        .iter()
        .filter(|r| r.privilege == privilege && applies(&r.scope))
        .collect();
    !hits.is_empty() && hits.iter().all(|r| r.effect == Effect::Grant)
}

/// The view of `role`, decided element by element.
pub fn view(g: &Graph, role: &Role) -> View {
    let rules = &role.rules;
    let mut v = View::default();
    for n in g.nodes() {
        if !allowed(rules, Privilege::Read, |s| applies_to_node(s, n, None)) {
            continue;
        }
        v.nodes.insert(n.id);
        for key in n.properties.keys() {
            if !allowed(rules, Privilege::Read, |s| applies_to_node(s, n, Some(key))) {
                v.masked.entry(n.id).or_default().insert(key.clone());
            }
        }
    }
    for r in g.relationships() {
        if v.nodes.contains(&r.src)
            && v.nodes.contains(&r.dst)
            && allowed(rules, Privilege::Traverse, |s| applies_to_rel(s, r))
        {
            v.relationships.insert(r.id);
        }
    }
    v
}

fn lit_eq(v: Option<&PropertyValue>, lit: &Literal) -> bool {
    match lit {
        Literal::Str(s) => v == Some(&PropertyValue::Text(s.clone())),
        Literal::Int(i) => v == Some(&PropertyValue::Integer(*i)),
        Literal::Bool(b) => v == Some(&PropertyValue::Boolean(*b)),
    }
}

fn visible_prop<'g>(v: &View, n: &'g Node, key: &str) -> Option<&'g PropertyValue> {
    let masked = v.masked.get(&n.id).is_some_and(|m| m.contains(key));
    if masked {
        None
    } else {
        n.properties.get(key)
    }
}

/// Enumerates every k-tuple of visible relationships (and every visible
/// node when k is zero), keeps the tuples that form a path matching the
/// query, then projects, orders and deduplicates.
pub fn query(g: &Graph, v: &View, q: &Query) -> Vec<Row> {
    let rels: Vec<&Relationship> = g.relationships().filter(|r| v.relationships.contains(&r.id)).collect();
    let nodes: Vec<&Node> = g.nodes().filter(|n| v.nodes.contains(&n.id)).collect();
    let k = q.hops.len();
    let mut matches: Vec<(Vec<ElementId>, BTreeMap<String, ElementId>)> = Vec::new();

    let mut tuple = vec![0usize; k];
    let total = rels.len().pow(k as u32);
    for code in 0..total.max(if k == 0 { 1 } else { 0 }) {
        let mut c = code;
        for slot in tuple.iter_mut() {
            *slot = c % rels.len().max(1);
            c /= rels.len().max(1);
        }
        let starts: Vec<NodeId> = if k == 0 {
            nodes.iter().map(|n| n.id).collect()
        } else {
            let (e, _) = &q.hops[0];
            let r = rels[tuple[0]];
            vec![match e.direction {
                EdgeDirection::Outgoing => r.src,
                EdgeDirection::Incoming => r.dst,
            }]
        };
        'start: for start in starts {
            let mut path = vec![ElementId::Node(start)];
            let mut at = start;
            for (i, (e, _)) in q.hops.iter().enumerate() {
                let r = rels[tuple[i]];
                let (from, to) = match e.direction {
                    EdgeDirection::Outgoing => (r.src, r.dst),
                    EdgeDirection::Incoming => (r.dst, r.src),
                };
                if from != at {
                    continue 'start;
                }
                path.push(ElementId::Rel(r.id));
                path.push(ElementId::Node(to));
                at = to;
            }
            let mut bind: BTreeMap<String, ElementId> = BTreeMap::new();
            for (i, np) in q.node_patterns().enumerate() {
                let ElementId::Node(id) = path[2 * i] else { unreachable!() };
                let n = g.node(id).unwrap();
                if np.label.as_ref().is_some_and(|l| !n.labels.contains(l)) {
                    continue 'start;
                }
                if !np.props.iter().all(|(key, lit)| lit_eq(visible_prop(v, n, key), lit)) {
                    continue 'start;
                }
                if let Some(var) = &np.var {
                    if *bind.entry(var.clone()).or_insert(path[2 * i]) != path[2 * i] {
                        continue 'start;
                    }
                }
            }
            for (i, ep) in q.edge_patterns().enumerate() {
                let ElementId::Rel(id) = path[2 * i + 1] else { unreachable!() };
                let r = g.relationship(id).unwrap();
                if ep.rel_type.as_ref().is_some_and(|t| *t != r.rel_type) {
                    continue 'start;
                }
                if q.at.is_some_and(|t| !valid_at(&r.validity, t)) {
                    continue 'start;
                }
                if !ep.props.iter().all(|(key, lit)| lit_eq(r.properties.get(key), lit)) {
                    continue 'start;
                }
                if let Some(var) = &ep.var {
                    if *bind.entry(var.clone()).or_insert(path[2 * i + 1]) != path[2 * i + 1] {
                        continue 'start;
                    }
                }
            }
            matches.push((path, bind));
        }
    }

    matches.sort_by(|a, b| a.0.cmp(&b.0));
    let mut rows: Vec<Row> = Vec::new();
    for (_, bind) in matches {
        let row: Row = q
            .returns
            .iter()
            .map(|item| match (bind[&item.var], &item.key) {
                (ElementId::Node(id), None) => Value::Node(id),
                (ElementId::Rel(id), None) => Value::Rel(id),
                (ElementId::Node(id), Some(key)) => visible_prop(v, g.node(id).unwrap(), key)
                    .cloned()
                    .map_or(Value::Null, Value::Property),
                (ElementId::Rel(id), Some(key)) => g
                    .relationship(id)
                    .unwrap()
                    .properties
                    .get(key)
                    .cloned()
                    .map_or(Value::Null, Value::Property),
            })
            .collect();
        if !rows.contains(&row) {
            rows.push(row);
        }
    }
    rows
}

/// Triples the RDF export must contain for the given view.
pub fn rdf_triple_count(g: &Graph, v: &View) -> usize {
    let nodes: usize = g
        .nodes()
        .filter(|n| v.nodes.contains(&n.id))
        .map(|n| {
            let masked = v.masked.get(&n.id).map_or(0, BTreeSet::len);
            n.labels.len() + n.properties.len() - masked + n.external_links.len()
        })
        .sum();
    let rels: usize = g
        .relationships()
        .filter(|r| v.relationships.contains(&r.id))
        .map(|r| 3 + usize::from(r.validity.start.is_some()) + usize::from(r.validity.end.is_some()) + r.properties.len())
        .sum();
    nodes + rels
}

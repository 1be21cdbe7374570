//! Random instances. Vocabularies are kept tiny so that random patterns,
//! rules and candidates hit existing elements often.

use rand::seq::SliceRandom;
use rand::Rng;

use prkg_core::access::ADMIN;
use prkg_core::ingest::{CandidateSource, CandidateTriple, Thresholds};
use prkg_core::query::{EdgeDirection, EdgePattern, Literal, NodePattern, Query, ReturnItem};
use prkg_core::{
    AccessRule, Effect, Engine, Graph, LinkSource, NodeId, PartialDate, Privilege, Properties, PropertyValue, Scope,
    TemporalInterval,
};

pub const LABELS: [&str; 3] = ["A", "B", "C"];
pub const NAMES: [&str; 4] = ["x", "y", "z", "w"];
pub const STATUSES: [&str; 3] = ["draft", "final", "underReview"];
pub const REL_TYPES: [&str; 3] = ["r", "s", "t"];

pub fn date<R: Rng>(rng: &mut R) -> PartialDate {
    let year = rng.gen_range(1998..=2002);
    loop {
        let d = match rng.gen_range(0..3) {
            0 => PartialDate::year(year),
            1 => PartialDate::month(year, rng.gen_range(1..=12)),
            _ => {
                // bias toward month ends to exercise normalization
                let day = if rng.gen_bool(0.4) { rng.gen_range(28..=31) } else { rng.gen_range(1..=31) };
                PartialDate::day(year, rng.gen_range(1..=12), day)
            }
        };
        if let Ok(d) = d {
            return d;
        }
    }
}

pub fn interval<R: Rng>(rng: &mut R) -> TemporalInterval {
    loop {
        let start = rng.gen_bool(0.7).then(|| date(rng));
        let end = rng.gen_bool(0.5).then(|| date(rng));
        if let Ok(i) = TemporalInterval::new(start, end) {
            return i;
        }
    }
}

fn node_props<R: Rng>(rng: &mut R) -> Properties {
    let mut p = Properties::new();
    if rng.gen_bool(0.8) {
        p.insert("name".into(), PropertyValue::text(*NAMES.choose(rng).unwrap()));
    }
    if rng.gen_bool(0.4) {
        p.insert("status".into(), PropertyValue::text(*STATUSES.choose(rng).unwrap()));
    }
    if rng.gen_bool(0.4) {
        p.insert("k".into(), PropertyValue::Integer(rng.gen_range(0..3)));
    }
    if rng.gen_bool(0.2) {
        p.insert("flag".into(), PropertyValue::Boolean(rng.gen()));
    }
    if rng.gen_bool(0.1) {
        p.insert("score".into(), PropertyValue::Decimal(rng.gen_range(-1.0..1.0)));
    }
    if rng.gen_bool(0.1) {
        p.insert("when".into(), PropertyValue::Date(date(rng)));
    }
    if rng.gen_bool(0.1) {
        p.insert("tags".into(), PropertyValue::List(vec!["a b".into(), "c\"d".into()]));
    }
    p
}

/// A random graph with up to `max_nodes` nodes (owner included) and up to
/// twice as many relationships. With `connected`, every new node is attached
/// to an earlier one so the graph has no orphans.
pub fn graph<R: Rng>(rng: &mut R, max_nodes: usize, connected: bool) -> Graph {
    let mut g = Graph::new("owner").unwrap();
    let n = rng.gen_range(1..=max_nodes);
    let mut ids = vec![g.owner()];
    for _ in 1..n {
        let mut labels: Vec<&str> = vec![LABELS.choose(rng).unwrap()];
        if rng.gen_bool(0.3) {
            labels.push(LABELS.choose(rng).unwrap());
        }
        let id = g.add_node(labels, node_props(rng)).unwrap();
        if rng.gen_bool(0.15) {
            let _ = g.set_external_link(id, LinkSource::Wikidata, "https://www.wikidata.org/wiki/Q1");
        }
        if connected {
            let anchor = *ids.choose(rng).unwrap();
            let (s, d) = if rng.gen() { (anchor, id) } else { (id, anchor) };
            g.add_relationship(s, d, REL_TYPES.choose(rng).unwrap(), interval(rng), Properties::new())
                .unwrap();
        }
        ids.push(id);
    }
    let extra = rng.gen_range(0..=(2 * n).min(30));
    for _ in 0..extra {
        let s = *ids.choose(rng).unwrap();
        let d = *ids.choose(rng).unwrap();
        let validity = if rng.gen_bool(0.3) { TemporalInterval::UNBOUNDED } else { interval(rng) };
        let mut p = Properties::new();
        if rng.gen_bool(0.3) {
            p.insert("w".into(), PropertyValue::Integer(rng.gen_range(0..2)));
        }
        let _ = g.add_relationship(s, d, REL_TYPES.choose(rng).unwrap(), validity, p);
    }
    g
}

pub fn scope<R: Rng>(rng: &mut R, g: &Graph) -> Scope {
    let nodes: Vec<NodeId> = g.nodes().map(|n| n.id).collect();
    match rng.gen_range(0..6) {
        0 => Scope::Graph,
        1 => Scope::NodeLabel { label: LABELS.choose(rng).unwrap().to_string() },
        2 => Scope::RelType { name: REL_TYPES.choose(rng).unwrap().to_string() },
        3 => Scope::Node { id: *nodes.choose(rng).unwrap() },
        4 => Scope::NodeProperty {
            label: LABELS.choose(rng).unwrap().to_string(),
            key: ["name", "status", "k"].choose(rng).unwrap().to_string(),
        },
        _ => {
            let count = rng.gen_range(1..=2);
            Scope::PropertyPredicate {
                label: LABELS.choose(rng).unwrap().to_string(),
                key: ["status", "name", "k"].choose(rng).unwrap().to_string(),
                values: STATUSES
                    .iter()
                    .chain(NAMES.iter())
                    .chain(["0", "1"].iter())
                    .copied()
                    .collect::<Vec<_>>()
                    .choose_multiple(rng, count)
                    .map(|s| s.to_string())
                    .collect(),
            }
        }
    }
}

pub fn rule<R: Rng>(rng: &mut R, g: &Graph) -> AccessRule {
    let effect = if rng.gen_bool(0.6) { Effect::Grant } else { Effect::Deny };
    // read and traverse dominate so views are interesting
    let privilege = *[
        Privilege::Read,
        Privilege::Read,
        Privilege::Traverse,
        Privilege::Traverse,
        Privilege::Write,
        Privilege::Append,
        Privilege::Control,
    ]
    .choose(rng)
    .unwrap();
    AccessRule {
        effect,
        privilege,
        scope: scope(rng, g),
    }
}

pub fn rules<R: Rng>(rng: &mut R, g: &Graph, max: usize) -> Vec<AccessRule> {
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| rule(rng, g)).collect()
}

fn literal_for<R: Rng>(rng: &mut R) -> (String, Literal) {
    match rng.gen_range(0..4) {
        0 => ("name".into(), Literal::Str(NAMES.choose(rng).unwrap().to_string())),
        1 => ("status".into(), Literal::Str(STATUSES.choose(rng).unwrap().to_string())),
        2 => ("k".into(), Literal::Int(rng.gen_range(0..3))),
        _ => ("flag".into(), Literal::Bool(rng.gen())),
    }
}

/// A random path query of at most `max_hops` edges. Node variables come from
/// `a..d`, edge variables from `e..f`, so reuse exercises repeated bindings.
pub fn query<R: Rng>(rng: &mut R, max_hops: usize) -> Query {
    let node_var = |rng: &mut R| -> Option<String> {
        rng.gen_bool(0.75).then(|| ["a", "b", "c", "d"].choose(rng).unwrap().to_string())
    };
    let node_pat = |rng: &mut R| NodePattern {
        var: node_var(rng),
        label: rng.gen_bool(0.4).then(|| LABELS.choose(rng).unwrap().to_string()),
        props: if rng.gen_bool(0.3) { vec![literal_for(rng)] } else { Vec::new() },
    };
    let start = node_pat(rng);
    let hops = (0..rng.gen_range(0..=max_hops))
        .map(|_| {
            let edge = EdgePattern {
                var: rng.gen_bool(0.4).then(|| ["e", "f"].choose(rng).unwrap().to_string()),
                rel_type: rng.gen_bool(0.5).then(|| REL_TYPES.choose(rng).unwrap().to_string()),
                direction: if rng.gen() { EdgeDirection::Outgoing } else { EdgeDirection::Incoming },
                props: if rng.gen_bool(0.15) {
                    vec![("w".into(), Literal::Int(rng.gen_range(0..2)))]
                } else {
                    Vec::new()
                },
            };
            (edge, node_pat(rng))
        })
        .collect::<Vec<_>>();
    let mut q = Query {
        start,
        hops,
        at: rng.gen_bool(0.3).then(|| date(rng)),
        as_role: None,
        returns: Vec::new(),
    };
    let mut bound: Vec<String> = q
        .node_patterns()
        .filter_map(|n| n.var.clone())
        .chain(q.edge_patterns().filter_map(|e| e.var.clone()))
        .collect();
    bound.sort();
    bound.dedup();
    if bound.is_empty() {
        q.start.var = Some("a".into());
        bound.push("a".into());
    }
    let count = rng.gen_range(1..=bound.len().min(3));
    q.returns = (0..count)
        .map(|_| ReturnItem {
            var: bound.choose(rng).unwrap().clone(),
            key: rng
                .gen_bool(0.6)
                .then(|| ["name", "k", "status", "w", "missing"].choose(rng).unwrap().to_string()),
        })
        .collect();
    q
}

/// A random candidate batch against `g`: endpoints mostly reuse existing
/// names (in random case), sometimes invent new ones.
pub fn candidates<R: Rng>(rng: &mut R, g: &Graph, n: usize) -> Vec<CandidateTriple> {
    let existing: Vec<(String, String)> = g
        .nodes()
        .filter_map(|node| {
            let name = node.name()?.to_string();
            let label = node.labels.iter().next()?.clone();
            Some((name, label))
        })
        .collect();
    let endpoint = |rng: &mut R| -> (String, String) {
        if !existing.is_empty() && rng.gen_bool(0.6) {
            let (name, label) = existing.choose(rng).unwrap().clone();
            let name = if rng.gen() { name.to_uppercase() } else { name };
            (name, label)
        } else {
            let name = format!("new{}", rng.gen_range(0..6));
            (name, LABELS.choose(rng).unwrap().to_string())
        }
    };
    (0..n)
        .map(|_| {
            let (head, head_label) = endpoint(rng);
            let (tail, tail_label) = endpoint(rng);
            let confidence = match rng.gen_range(0..10) {
                0 => 0.9,
                1 => 0.25,
                2 => 0.5,
                _ => rng.gen_range(0.0..=1.0),
            };
            CandidateTriple {
                head,
                head_label,
                rel: REL_TYPES.choose(rng).unwrap().to_string(),
                tail,
                tail_label,
                confidence,
                source: *[CandidateSource::Paper, CandidateSource::Conversation, CandidateSource::Activity, CandidateSource::Manual]
                    .choose(rng)
                    .unwrap(),
                provenance: if rng.gen() { String::new() } else { format!("doc:{}", rng.gen_range(0..9)) },
            }
        })
        .collect()
}

/// A random engine state: graph, extra roles, inbox with decided entries,
/// thresholds.
pub fn engine<R: Rng>(rng: &mut R, max_nodes: usize) -> Engine {
    let mut e = Engine::new("owner").unwrap();
    let connected = rng.gen();
    e.graph = graph(rng, max_nodes, connected);
    for i in 0..rng.gen_range(0..3) {
        let name = format!("role{i}");
        if rng.gen() {
            e.create_role(ADMIN, &name).unwrap();
        } else {
            e.copy_role(ADMIN, &name, ADMIN).unwrap();
        }
        for r in rules(rng, &e.graph, 5) {
            e.add_rule(ADMIN, &name, r).unwrap();
        }
    }
    let accept = rng.gen_range(0.5..=1.0);
    e.thresholds = Thresholds::new(accept, rng.gen_range(0.0..accept)).unwrap();
    let n = rng.gen_range(0..6);
    let batch = candidates(rng, &e.graph, n);
    e.submit_candidates(ADMIN, &batch).unwrap();
    let pending: Vec<u64> = e.inbox.list(None).iter().map(|x| x.id).collect();
    for id in pending {
        match rng.gen_range(0..3) {
            0 => {
                let _ = e.inbox_accept(ADMIN, id, Some(date(rng)));
            }
            1 => e.inbox_reject(ADMIN, id, rng.gen_bool(0.5).then(|| date(rng))).unwrap(),
            _ => {}
        }
    }
    e
}

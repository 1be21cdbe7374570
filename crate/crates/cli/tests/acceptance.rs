//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fail.

mod common;

use std::collections::BTreeSet;

use prkg_core::access::ADMIN;
use prkg_core::ingest::{submit_candidates, Inbox, Thresholds};
use prkg_core::query::evaluate_in_view;
use prkg_core::store::{from_snapshot_str, rdf_lines, to_snapshot_string, DEFAULT_BASE};
use prkg_core::{view_as, Effect, Engine, Graph, NodeId, PartialDate, Registry, RelId, Role, TemporalInterval, View};
use prkg_testkit::{gen, oracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::Sandbox;

const QUERY_CASES: u64 = 500;
const TEMPORAL_CASES: u64 = 1000;
const ACCESS_CASES: u64 = 200;
const PERSISTENCE_CASES: u64 = 100;
const INGEST_CASES: u64 = 200;

#[derive(Default)]
struct Report {
    passed: usize,
    failed: Vec<String>,
}

impl Report {
    fn check(&mut self, id: &str, title: &str, ok: bool, detail: impl AsRef<str>) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:<3} {title}: {}", detail.as_ref());
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(id.to_string());
        }
    }
}

fn rng(stream: u64, case: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream.wrapping_mul(1_000_003).wrapping_add(case))
}

fn fixture_sandbox() -> Sandbox {
    let sb = Sandbox::new();
    let r = sb.script("sunita.sh");
    assert_eq!(r.code, 0, "fixture script failed: {}", r.stderr);
    sb
}

fn node_by_name(g: &Graph, name: &str) -> NodeId {
    g.nodes()
        .find(|n| n.name() == Some(name))
        .unwrap_or_else(|| panic!("no node named {name}"))
        .id
}

fn rel_by(g: &Graph, src: &str, rel_type: &str, dst: &str) -> RelId {
    let (s, d) = (node_by_name(g, src), node_by_name(g, dst));
    g.relationships()
        .find(|r| r.src == s && r.dst == d && r.rel_type == rel_type)
        .unwrap_or_else(|| panic!("no {src} -{rel_type}-> {dst}"))
        .id
}

fn names<T: Copy>(g: &Graph, ids: &BTreeSet<T>, show: impl Fn(&Graph, T) -> String) -> String {
    let v: Vec<String> = ids.iter().map(|id| show(g, *id)).collect();
    format!("{{{}}}", v.join(", "))
}

fn show_node(g: &Graph, id: NodeId) -> String {
    g.node(id).and_then(|n| n.name()).unwrap_or("?").to_string()
}

fn show_rel(g: &Graph, id: RelId) -> String {
    let r = g.relationship(id).unwrap();
    format!("{} {}->{}", r.rel_type, show_node(g, r.src), show_node(g, r.dst))
}

fn criterion_1(report: &mut Report) {
    let sb = fixture_sandbox();
    let e = sb.engine();
    let g = &e.graph;
    let expected_nodes = [
        ("Sunita", "Researcher"),
        ("IACS", "Institution"),
        ("IISER Kolkata", "Institution"),
        ("NLP", "Topic"),
        ("topic modeling", "Task"),
        ("LDA", "Method"),
        ("CTM", "Method"),
        ("NLP Lab", "Lab"),
        ("SpERT.PL", "Paper"),
        ("ScienceKG", "Paper"),
        ("PhD Selection Committee", "Committee"),
        ("CCLINC", "Paper"),
        ("translation", "Task"),
        ("word sense disambiguation", "Method"),
    ];
    let actual_nodes: BTreeSet<(String, String)> = g
        .nodes()
        .map(|n| (n.name().unwrap_or("").to_string(), n.labels.iter().cloned().collect::<Vec<_>>().join(":")))
        .collect();
    let want_nodes: BTreeSet<(String, String)> =
        expected_nodes.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let status_ok = g
        .node(node_by_name(g, "SpERT.PL"))
        .and_then(|n| n.properties.get("status"))
        .is_some_and(|v| v.to_string() == "underReview");

    let d = |s: &str| s.parse::<PartialDate>().unwrap();
    let expected_rels = [
        ("Sunita", "worksFor", "IISER Kolkata", TemporalInterval::new(Some(d("2014")), Some(d("2018"))).unwrap()),
        ("Sunita", "worksFor", "IACS", TemporalInterval::since(d("2018"))),
        ("Sunita", "interest", "NLP", TemporalInterval::UNBOUNDED),
        ("Sunita", "task", "topic modeling", TemporalInterval::UNBOUNDED),
        ("topic modeling", "method", "LDA", TemporalInterval::UNBOUNDED),
        ("topic modeling", "method", "CTM", TemporalInterval::UNBOUNDED),
        ("Sunita", "manages", "NLP Lab", TemporalInterval::UNBOUNDED),
        ("Sunita", "writes", "SpERT.PL", TemporalInterval::UNBOUNDED),
        ("Sunita", "reviewerOf", "ScienceKG", TemporalInterval::UNBOUNDED),
        ("Sunita", "memberOf", "PhD Selection Committee", TemporalInterval::UNBOUNDED),
        ("Sunita", "reads", "CCLINC", TemporalInterval::UNBOUNDED),
        ("CCLINC", "task", "translation", TemporalInterval::UNBOUNDED),
        ("translation", "method", "word sense disambiguation", TemporalInterval::UNBOUNDED),
    ];
    let actual_rels: BTreeSet<String> = g
        .relationships()
        .map(|r| format!("{} {} {}", show_rel(g, r.id), r.validity, ""))
        .collect();
    let want_rels: BTreeSet<String> = expected_rels
        .iter()
        .map(|(s, t, o, v)| format!("{t} {s}->{o} {v} "))
        .collect();

    let v = sb.run(&["validate"]);
    let clean = v.code == 0 && v.stdout == "0 orphans\n0 schema warnings\n";
    let brute_orphans = oracle::orphans(g).len();
    report.check(
        "1",
        "fixture reproduction",
        g.node_count() == 14
            && g.relationship_count() == 13
            && actual_nodes == want_nodes
            && actual_rels == want_rels
            && status_ok
            && clean
            && brute_orphans == 0,
        format!(
            "{} nodes, {} relationships, inventory {}, validate {:?}, brute-force orphans {}",
            g.node_count(),
            g.relationship_count(),
            if actual_nodes == want_nodes && actual_rels == want_rels && status_ok { "matches" } else { "differs" },
            v.stdout.trim().replace('\n', ", "),
            brute_orphans
        ),
    );
}

fn criterion_2(report: &mut Report) {
    let sb = fixture_sandbox();
    let r = sb.script("collaborator.sh");
    assert_eq!(r.code, 0, "collaborator script failed: {}", r.stderr);
    let e = sb.engine();
    let g = &e.graph;
    let view = e.view("collaborator").unwrap();

    let hidden_nodes: BTreeSet<NodeId> = g.nodes().map(|n| n.id).filter(|id| !view.has_node(*id)).collect();
    let want_nodes = BTreeSet::from([node_by_name(g, "PhD Selection Committee"), node_by_name(g, "SpERT.PL")]);
    report.check(
        "2a",
        "collaborator hides exactly {PhDSel, SpERT.PL}",
        hidden_nodes == want_nodes,
        format!("hidden nodes {}", names(g, &hidden_nodes, show_node)),
    );

    let hidden_rels: BTreeSet<RelId> = g.relationships().map(|r| r.id).filter(|id| !view.has_rel(*id)).collect();
    let want_rels = BTreeSet::from([
        rel_by(g, "Sunita", "reviewerOf", "ScienceKG"),
        rel_by(g, "Sunita", "writes", "SpERT.PL"),
    ]);
    report.check(
        "2b",
        "collaborator hides exactly {reviewerOf, writes}",
        hidden_rels == want_rels,
        format!(
            "hidden relationships {} (expected {})",
            names(g, &hidden_rels, show_rel),
            names(g, &want_rels, show_rel)
        ),
    );

    let before = std::fs::read(&sb.data).unwrap();
    let facts = common::fixture("facts.jsonl");
    let bib = common::fixture("publications.bib");
    let commands: Vec<Vec<&str>> = vec![
        vec!["node", "add", "--label", "Topic", "--prop", "name=x"],
        vec!["node", "delete", "6"],
        vec!["node", "delete", "6", "--cascade"],
        vec!["node", "set", "4", "--prop", "name=y"],
        vec!["rel", "add", "1", "4", "reads"],
        vec!["rel", "end", "16", "2024"],
        vec!["link", "add", "4", "wikidata", "https://www.wikidata.org/wiki/Q30642"],
        vec!["import", "triples", facts.to_str().unwrap()],
        vec!["import", "bibtex", bib.to_str().unwrap()],
        vec!["inbox", "accept", "1"],
        vec!["inbox", "reject", "1"],
        vec!["role", "create", "x"],
        vec!["role", "copy", "x", "admin"],
        vec!["grant", "collaborator", "write", "graph"],
        vec!["deny", "admin", "read", "graph"],
        vec!["save"],
    ];
    let mut bad = Vec::new();
    for cmd in &commands {
        let mut args = vec!["--as", "collaborator"];
        args.extend(cmd.iter().copied());
        let r = sb.run(&args);
        if r.code != 2 || !r.stderr.contains("denied") {
            bad.push(format!("`{}` exit {}", cmd.join(" "), r.code));
        }
    }
    let unchanged = std::fs::read(&sb.data).unwrap() == before;
    report.check(
        "2c",
        "mutating commands as collaborator exit 2",
        bad.is_empty() && unchanged,
        if bad.is_empty() {
            format!("{} commands denied, snapshot unchanged: {unchanged}", commands.len())
        } else {
            bad.join("; ")
        },
    );
}

fn criterion_3(report: &mut Report) {
    let sb = fixture_sandbox();
    sb.script("collaborator.sh");
    let lines = |q: &str| -> BTreeSet<String> { sb.run(&["query", q]).stdout.lines().map(String::from).collect() };
    let q1 = lines(r#"MATCH (s:Researcher {name:"Sunita"})-[:task]->(t:Task)-[:method]->(m:Method) RETURN m.name"#);
    let q2 = lines("MATCH (s)-[:worksFor]->(i:Institution) AT 2017 RETURN i.name");
    let q3 = lines("MATCH (s)-[:reviewerOf]->(p:Paper) AS collaborator RETURN p.name");
    let ok = q1 == BTreeSet::from(["CTM".into(), "LDA".into()])
        && q2 == BTreeSet::from(["IISER Kolkata".into()])
        && q3.is_empty();
    report.check(
        "3a",
        "fixture query examples",
        ok,
        format!("{q1:?}; {q2:?}; {q3:?}"),
    );

    let mut mismatches = 0;
    let mut rows = 0;
    for case in 0..QUERY_CASES {
        let mut r = rng(3, case);
        let connected = r.gen();
        let g = gen::graph(&mut r, 20, connected);
        let view = if r.gen_bool(0.5) {
            View::full(&g)
        } else {
            view_as(&g, &Role { name: "r".into(), rules: gen::rules(&mut r, &g, 6) })
        };
        let q = gen::query(&mut r, 3);
        let got = evaluate_in_view(&g, &view, &q);
        rows += got.len();
        if got != oracle::query(&g, &view, &q) {
            mismatches += 1;
        }
    }
    report.check(
        "3b",
        "query oracle equivalence",
        mismatches == 0,
        format!("{QUERY_CASES} cases, {rows} rows, {mismatches} mismatches"),
    );
}

fn criterion_4(report: &mut Report) {
    let mut mismatches = 0;
    for case in 0..TEMPORAL_CASES {
        let mut r = rng(4, case);
        let i = gen::interval(&mut r);
        let t = gen::date(&mut r);
        if i.is_valid_at(t) != oracle::valid_at(&i, t) {
            mismatches += 1;
        }
    }
    let d = |s: &str| s.parse::<PartialDate>().unwrap();
    let iv = |s: Option<&str>, e: Option<&str>| TemporalInterval::new(s.map(d), e.map(d)).unwrap();
    let edges = [
        (iv(Some("2014"), Some("2018")), "2018-12-31"),
        (iv(Some("2014"), Some("2018")), "2019"),
        (iv(Some("2018"), None), "2017-12"),
        (iv(Some("2018-03"), None), "2018"),
        (iv(None, Some("2000-02")), "2000-02-29"),
        (iv(None, Some("1900-02")), "1900-03-01"),
        (iv(Some("2000-02-29"), Some("2000-02-29")), "2000-02"),
        (iv(None, None), "1999"),
        (iv(Some("2001-12-31"), None), "2001"),
        (iv(None, Some("2001-01-01")), "2001-01"),
    ];
    let edge_mismatches = edges.iter().filter(|(i, t)| i.is_valid_at(d(t)) != oracle::valid_at(i, d(t))).count();
    report.check(
        "4",
        "temporal semantics vs day expansion",
        mismatches == 0 && edge_mismatches == 0,
        format!(
            "{TEMPORAL_CASES} random pairs ({mismatches} mismatches), {} edge cases ({edge_mismatches} mismatches)",
            edges.len()
        ),
    );
}

fn contained(g: &Graph, a: &View, b: &View) -> bool {
    a.nodes.is_subset(&b.nodes)
        && a.relationships.is_subset(&b.relationships)
        && a.nodes.iter().all(|id| {
            g.node(*id)
                .unwrap()
                .properties
                .keys()
                .all(|k| a.is_masked(*id, k) || !b.is_masked(*id, k))
        })
}

fn criterion_5(report: &mut Report) {
    let mut fails = [0usize; 6];
    for case in 0..ACCESS_CASES {
        let mut r = rng(5, case);
        let g = gen::graph(&mut r, 30, false);
        let rules = gen::rules(&mut r, &g, 10);
        let role = |rules: Vec<_>| Role { name: "r".into(), rules };
        let base = view_as(&g, &role(rules.clone()));

        let mut extra = gen::rule(&mut r, &g);
        extra.effect = Effect::Deny;
        let mut with_deny = rules.clone();
        with_deny.push(extra.clone());
        fails[0] += usize::from(!contained(&g, &view_as(&g, &role(with_deny)), &base));
        extra.effect = Effect::Grant;
        let mut with_grant = rules.clone();
        with_grant.push(extra);
        fails[1] += usize::from(!contained(&g, &base, &view_as(&g, &role(with_grant))));

        let closed = base.relationships.iter().all(|id| {
            let rel = g.relationship(*id).unwrap();
            base.has_node(rel.src) && base.has_node(rel.dst)
        });
        fails[2] += usize::from(!closed);
        fails[3] += usize::from(view_as(&g, &role(Vec::new())) != View::default());

        let mut e = Engine::new("owner").unwrap();
        e.graph = g.clone();
        e.create_role(ADMIN, "orig").unwrap();
        for rule in rules.iter().cloned() {
            e.add_rule(ADMIN, "orig", rule).unwrap();
        }
        e.copy_role(ADMIN, "copy", "orig").unwrap();
        fails[4] += usize::from(e.view("copy").unwrap() != e.view("orig").unwrap());

        fails[5] += usize::from(base != oracle::view(&g, &role(rules)));
    }
    let names = ["deny monotonicity", "grant monotonicity", "view closure", "default deny", "copy equivalence", "resolver equivalence"];
    for (i, name) in names.iter().enumerate() {
        report.check(
            &format!("5{}", (b'a' + i as u8) as char),
            name,
            fails[i] == 0,
            format!("{ACCESS_CASES} instances, {} violations", fails[i]),
        );
    }
}

fn criterion_6(report: &mut Report) {
    let (mut trip, mut bytes, mut count) = (0, 0, 0);
    let mut roles_seen = 0;
    let mut entries_seen = 0;
    for case in 0..PERSISTENCE_CASES {
        let mut r = rng(6, case);
        let e = gen::engine(&mut r, 25);
        roles_seen += e.roles.roles().count();
        entries_seen += e.inbox.len();
        let text = to_snapshot_string(&e);
        match from_snapshot_str(&text) {
            Ok(back) => {
                trip += usize::from(back != e);
                bytes += usize::from(to_snapshot_string(&back) != text);
            }
            Err(_) => trip += 1,
        }
        for role in e.roles.roles() {
            let v = view_as(&e.graph, role);
            count += usize::from(rdf_lines(&e.graph, Some(&v), DEFAULT_BASE).len() != oracle::rdf_triple_count(&e.graph, &v));
        }
    }
    report.check(
        "6a",
        "snapshot round trip",
        trip == 0,
        format!("{PERSISTENCE_CASES} states ({roles_seen} roles, {entries_seen} inbox entries), {trip} mismatches"),
    );
    report.check("6b", "double-save byte identity", bytes == 0, format!("{bytes} differences"));
    report.check("6c", "RDF triple-count law", count == 0, format!("{count} violations"));

    let sb = fixture_sandbox();
    sb.script("collaborator.sh");
    let out = sb.path("collab.nt");
    let run = sb.run(&["--as", "collaborator", "export", "rdf", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap_or_default();
    let e = sb.engine();
    let v = e.view("collaborator").unwrap();
    let mut leaks = Vec::new();
    for n in e.graph.nodes().filter(|n| !v.has_node(n.id)) {
        let iri = format!("<{DEFAULT_BASE}node/{}>", n.id);
        if text.contains(&iri) {
            leaks.push(iri);
        }
    }
    for rel in e.graph.relationships().filter(|r| !v.has_rel(r.id)) {
        let iri = format!("<{DEFAULT_BASE}rel/{}>", rel.id);
        if text.contains(&iri) {
            leaks.push(iri);
        }
    }
    let hidden = e.graph.node_count() - v.nodes.len() + e.graph.relationship_count() - v.relationships.len();
    report.check(
        "6d",
        "collaborator export omits hidden ids",
        run.code == 0 && leaks.is_empty() && !text.is_empty(),
        format!("{} triples, {hidden} hidden elements, {} leaked", text.lines().count(), leaks.len()),
    );
}

fn criterion_7(report: &mut Report) {
    let (mut conservation, mut monotone, mut orphans) = (0, 0, 0);
    let mut totals = (0, 0, 0);
    for case in 0..INGEST_CASES {
        let mut r = rng(7, case);
        let connected = r.gen();
        let g = gen::graph(&mut r, 20, connected);
        let n = r.gen_range(1..=12);
        let batch = gen::candidates(&mut r, &g, n);
        let run = |accept: f64, accept_inbox: bool| {
            let mut g = g.clone();
            let before: BTreeSet<NodeId> = g.orphans().into_iter().collect();
            let mut inbox = Inbox::new();
            let t = Thresholds::new(accept, 0.25).unwrap();
            let rep = submit_candidates(&mut g, &mut inbox, &t, &Registry::builtin(), &batch).unwrap();
            let mut same = g.orphans().into_iter().collect::<BTreeSet<_>>() == before;
            if accept_inbox {
                let ids: Vec<u64> = inbox.list(None).iter().map(|e| e.id).collect();
                for id in ids {
                    let _ = inbox.accept(&mut g, &Registry::builtin(), id, None);
                    same &= g.orphans().into_iter().collect::<BTreeSet<_>>() == before;
                }
            }
            (rep, same)
        };
        let (low, low_same) = run(0.5, false);
        let (high, high_same) = run(0.9, true);
        conservation += usize::from(low.total() != batch.len() || high.total() != batch.len());
        monotone += usize::from(high.merged > low.merged);
        orphans += usize::from(!low_same || !high_same);
        totals.0 += high.merged;
        totals.1 += high.queued;
        totals.2 += high.dropped;
    }
    report.check(
        "7a",
        "ingest conservation",
        conservation == 0,
        format!(
            "{INGEST_CASES} batches (at 0.9: {} merged, {} queued, {} dropped), {conservation} violations",
            totals.0, totals.1, totals.2
        ),
    );
    report.check("7b", "accept 0.5 -> 0.9 never merges more", monotone == 0, format!("{monotone} violations"));
    report.check("7c", "ingest leaves orphans unchanged", orphans == 0, format!("{orphans} violations"));
}

fn main() {
    let mut report = Report::default();
    criterion_1(&mut report);
    criterion_2(&mut report);
    criterion_3(&mut report);
    criterion_4(&mut report);
    criterion_5(&mut report);
    criterion_6(&mut report);
    criterion_7(&mut report);
    let total = report.passed + report.failed.len();
    println!("acceptance: {}/{total} passed", report.passed);
    if !report.failed.is_empty() {
        println!("failed: {}", report.failed.join(", "));
        std::process::exit(1);
    }
}

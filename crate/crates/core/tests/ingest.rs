use std::collections::BTreeSet;

use prkg_core::access::ADMIN;
use prkg_core::ingest::{
    import_bibtex, import_triples, submit_candidates, CandidateSource, CandidateTriple, EntryState, Inbox, Thresholds,
};
use prkg_core::{Engine, Error, NodeId, Properties, Registry, TemporalInterval};
use prkg_testkit::{gen, oracle};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn orphan_set(g: &prkg_core::Graph) -> BTreeSet<NodeId> {
    g.orphans().into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn batches_conserve_and_keep_orphans(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let connected = rng.gen();
        let mut g = gen::graph(&mut rng, 20, connected);
        let n = rng.gen_range(0..=12);
        let batch = gen::candidates(&mut rng, &g, n);
        let before = orphan_set(&g);
        let mut inbox = Inbox::new();
        let report = submit_candidates(&mut g, &mut inbox, &Thresholds::default(), &Registry::builtin(), &batch).unwrap();
        prop_assert_eq!(report.merged + report.queued + report.dropped, batch.len());
        prop_assert_eq!(inbox.len(), report.queued);
        prop_assert_eq!(&orphan_set(&g), &before);
        prop_assert_eq!(orphan_set(&g), oracle::orphans(&g));

        for entry in inbox.list(None).iter().map(|e| e.id).collect::<Vec<_>>() {
            if rng.gen() {
                let _ = inbox.accept(&mut g, &Registry::builtin(), entry, None);
            } else {
                inbox.reject(entry, None).unwrap();
            }
            prop_assert_eq!(&orphan_set(&g), &before);
        }
    }

    #[test]
    fn raising_accept_never_merges_more(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let connected = rng.gen();
        let g = gen::graph(&mut rng, 20, connected);
        let n = rng.gen_range(0..=12);
        let batch = gen::candidates(&mut rng, &g, n);
        let run = |accept: f64| {
            let mut g = g.clone();
            let mut inbox = Inbox::new();
            let t = Thresholds::new(accept, 0.25).unwrap();
            submit_candidates(&mut g, &mut inbox, &t, &Registry::builtin(), &batch).unwrap()
        };
        let low = run(0.5);
        let high = run(0.9);
        prop_assert!(high.merged <= low.merged, "{:?} vs {:?}", high, low);
        prop_assert_eq!(high.dropped, low.dropped);
    }
}

fn cand(h: (&str, &str), rel: &str, t: (&str, &str), conf: f64) -> CandidateTriple {
    CandidateTriple::new(h, rel, t, conf, CandidateSource::Paper)
}

#[test]
fn routing_by_confidence() {
    let mut e = Engine::new("Sunita").unwrap();
    let interest = |c| cand(("Sunita", "Researcher"), "interest", ("NLP", "Topic"), c);
    let r = e.submit_candidates(ADMIN, &[interest(0.95)]).unwrap();
    assert_eq!((r.merged, r.queued, r.dropped), (1, 0, 0));
    assert_eq!(e.graph.node_count(), 2);

    let mut e = Engine::new("Sunita").unwrap();
    let r = e.submit_candidates(ADMIN, &[interest(0.5)]).unwrap();
    assert_eq!((r.merged, r.queued, r.dropped), (0, 1, 0));
    assert_eq!(e.inbox.list(Some(EntryState::Pending)).len(), 1);

    let mut e = Engine::new("Sunita").unwrap();
    let before = e.graph.clone();
    let r = e.submit_candidates(ADMIN, &[interest(0.1)]).unwrap();
    assert_eq!((r.merged, r.queued, r.dropped), (0, 0, 1));
    assert_eq!(e.graph, before);
}

#[test]
fn malformed_batch_is_refused_whole() {
    let mut e = Engine::new("Sunita").unwrap();
    let good = cand(("Sunita", "Researcher"), "interest", ("NLP", "Topic"), 0.95);
    let bad = cand(("Sunita", "Researcher"), "", ("NLP", "Topic"), 0.95);
    let err = e.submit_candidates(ADMIN, &[good, bad]).unwrap_err();
    assert!(err.to_string().contains("candidate 2"), "{err}");
    assert_eq!(e.graph.node_count(), 1);
}

fn with_cclinc() -> Engine {
    let mut e = Engine::new("Sunita").unwrap();
    let owner = e.graph.owner();
    let cclinc = e.graph.add_node(["Paper"], prkg_core::props([("name", "CCLINC")])).unwrap();
    e.graph
        .add_relationship(owner, cclinc, "reads", TemporalInterval::UNBOUNDED, Properties::new())
        .unwrap();
    e
}

#[test]
fn accepting_reuses_known_nodes() {
    let mut e = with_cclinc();
    let r = e
        .submit_candidates(
            ADMIN,
            &[
                cand(("CCLINC", "Paper"), "task", ("translation", "Task"), 0.6),
                cand(("translation", "Task"), "method", ("word sense disambiguation", "Method"), 0.6),
            ],
        )
        .unwrap();
    assert_eq!(r.queued, 2);
    let nodes = e.graph.node_count();
    let m = e.inbox_accept(ADMIN, 1, None).unwrap();
    assert_eq!(m.created_nodes.len(), 1);
    assert_eq!(e.graph.node_count(), nodes + 1);
    assert_eq!(e.graph.node(m.head).unwrap().name(), Some("CCLINC"));
    assert!(matches!(e.inbox_accept(ADMIN, 1, None), Err(Error::Conflict(_))));
    let m2 = e.inbox_accept(ADMIN, 2, None).unwrap();
    assert_eq!(m2.head, m.tail);
    assert_eq!(e.inbox.list(Some(EntryState::Accepted)).len(), 2);
    assert!(e.graph.validate(&Registry::builtin()).is_clean());
}

#[test]
fn accepting_a_known_fact_is_a_duplicate() {
    let mut e = with_cclinc();
    let c = cand(("cclinc", "Paper"), "task", ("translation", "Task"), 0.95);
    e.submit_candidates(ADMIN, std::slice::from_ref(&c)).unwrap();
    let rels = e.graph.relationship_count();
    let r = e.submit_candidates(ADMIN, &[c]).unwrap();
    assert_eq!((r.merged, r.duplicates), (1, 1));
    assert_eq!(e.graph.relationship_count(), rels);
}

#[test]
fn unanchored_facts_wait_in_the_inbox() {
    let mut e = Engine::new("Sunita").unwrap();
    let r = e
        .submit_candidates(ADMIN, &[cand(("CCLINC", "Paper"), "task", ("translation", "Task"), 1.0)])
        .unwrap();
    assert_eq!((r.merged, r.queued, r.unanchored), (0, 1, 1));
    assert!(matches!(e.inbox_accept(ADMIN, 1, None), Err(Error::Conflict(_))));
    assert_eq!(e.inbox.get(1).unwrap().state, EntryState::Pending);
    e.inbox_reject(ADMIN, 1, None).unwrap();
    assert!(matches!(e.inbox_reject(ADMIN, 1, None), Err(Error::Conflict(_))));
    assert!(matches!(e.inbox_reject(ADMIN, 9, None), Err(Error::NotFound(_))));
}

#[test]
fn triple_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("facts.jsonl");
    std::fs::write(
        &path,
        concat!(
            r#"{"head":"Sunita","head_label":"Researcher","rel":"interest","tail":"NLP","tail_label":"Topic","confidence":1.0,"source":"paper"}"#,
            "\n",
            r#"{"head":"CCLINC","head_label":"Paper","rel":"task","tail":"translation","tail_label":"Task","confidence":1.0,"source":"paper"}"#,
            "\n",
            r#"{"head":"translation","head_label":"Task","rel":"method","tail":"word sense disambiguation","tail_label":"Method","confidence":1.0,"source":"paper"}"#,
            "\n"
        ),
    )
    .unwrap();
    let mut e = with_cclinc();
    let r = e.import_triples(ADMIN, &path).unwrap();
    assert_eq!(r.merged, 3);

    std::fs::write(&path, "").unwrap();
    let r = e.import_triples(ADMIN, &path).unwrap();
    assert_eq!(r.total(), 0);

    std::fs::write(
        &path,
        r#"{"head":"a","head_label":"Topic","tail":"b","tail_label":"Topic","confidence":1.0,"source":"paper"}"#,
    )
    .unwrap();
    let mut g = e.graph.clone();
    let mut inbox = Inbox::new();
    let err = import_triples(&mut g, &mut inbox, &Thresholds::default(), &Registry::builtin(), &path).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
}

#[test]
fn bibtex_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("refs.bib");
    let mut e = Engine::new("Sunita").unwrap();

    std::fs::write(
        &path,
        "@inproceedings{spert,\n  author = {Sunita and Someone Else},\n  title = {SpERT.PL},\n  year = 2023\n}\n",
    )
    .unwrap();
    let r = import_bibtex(&mut e.graph, &path, "Sunita").unwrap();
    assert_eq!((r.papers, r.writes_edges), (1, 1));

    std::fs::write(&path, "@article{other, author = {A. Person}, title = {Elsewhere}}\n").unwrap();
    let r = import_bibtex(&mut e.graph, &path, "Sunita").unwrap();
    assert_eq!((r.papers, r.writes_edges), (1, 0));

    std::fs::write(&path, "@misc{m, title = {Note}}\n").unwrap();
    let r = import_bibtex(&mut e.graph, &path, "Sunita").unwrap();
    assert_eq!((r.papers, r.writes_edges), (0, 0));
    assert_eq!(r.warnings.len(), 1);

    std::fs::write(&path, "@article{x,\n title = {open\n").unwrap();
    assert!(matches!(import_bibtex(&mut e.graph, &path, "Sunita"), Err(Error::Parse { .. })));
}

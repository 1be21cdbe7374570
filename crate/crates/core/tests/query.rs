use prkg_core::access::ADMIN;
use prkg_core::query::{evaluate, evaluate_as, evaluate_in_view, parse_query, ErrorKind, Row, Value};
use prkg_core::{view_as, PropertyValue};
use prkg_testkit::{fixture, gen, oracle};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn texts(rows: &[Row]) -> Vec<String> {
    rows.iter()
        .map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>().join(" | "))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn evaluation_matches_enumerator(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let connected = rng.gen();
        let g = gen::graph(&mut rng, 20, connected);
        let rules = gen::rules(&mut rng, &g, 6);
        let role = prkg_core::Role { name: "r".into(), rules };
        let view = if rng.gen_bool(0.3) { prkg_core::View::full(&g) } else { view_as(&g, &role) };
        let q = gen::query(&mut rng, 3);
        prop_assert_eq!(evaluate_in_view(&g, &view, &q), oracle::query(&g, &view, &q), "{}", q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn restricted_roles_see_a_subset(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut e = gen::engine(&mut rng, 20);
        e.create_role(ADMIN, "r").unwrap();
        for rule in gen::rules(&mut rng, &e.graph, 8) {
            e.add_rule(ADMIN, "r", rule).unwrap();
        }
        // node and relationship values are compared; property values can
        // differ only by masking, which turns them into nulls
        let mut q = gen::query(&mut rng, 3);
        for item in &mut q.returns {
            item.key = None;
        }
        let admin = evaluate(&e.graph, &e.roles, &q).unwrap();
        let restricted = evaluate_as(&e.graph, &e.roles, &q, "r").unwrap();
        for row in &restricted {
            prop_assert!(admin.contains(row), "{:?} missing under admin for {}", row, q);
        }
    }

    #[test]
    fn at_clause_never_adds_rows(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gen::graph(&mut rng, 20, true);
        let view = prkg_core::View::full(&g);
        let mut q = gen::query(&mut rng, 3);
        q.at = None;
        let without = evaluate_in_view(&g, &view, &q);
        q.at = Some(gen::date(&mut rng));
        let with = evaluate_in_view(&g, &view, &q);
        prop_assert!(with.iter().all(|r| without.contains(r)));
        prop_assert!(with.len() <= without.len());
    }

    #[test]
    fn printed_queries_reparse(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q = gen::query(&mut rng, 3);
        if rng.gen() {
            q.as_role = Some("collaborator".into());
        }
        let printed = q.to_string();
        let back = parse_query(&printed).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?;
        prop_assert_eq!(back, q);
    }
}

#[test]
fn fixture_task_methods() {
    let (e, _) = fixture::build();
    let rows = e
        .query(
            ADMIN,
            r#"MATCH (s:Researcher {name:"Sunita"})-[:task]->(t:Task)-[:method]->(m:Method) RETURN m.name"#,
        )
        .unwrap();
    let mut names = texts(&rows);
    names.sort();
    assert_eq!(names, ["CTM", "LDA"]);
}

#[test]
fn fixture_employer_in_2017() {
    let (e, _) = fixture::build();
    let rows = e
        .query(ADMIN, "MATCH (s)-[:worksFor]->(i:Institution) AT 2017 RETURN i.name")
        .unwrap();
    assert_eq!(rows, vec![vec![Value::Property(PropertyValue::text("IISER Kolkata"))]]);
    let rows = e
        .query(ADMIN, "MATCH (s)-[:worksFor]->(i:Institution) AT 2018 RETURN i.name")
        .unwrap();
    // rows follow relationship id order: the IISER edge was added first
    assert_eq!(texts(&rows), ["IISER Kolkata", "IACS"]);
}

#[test]
fn fixture_reviewing_hidden_from_collaborator() {
    let (mut e, _) = fixture::build();
    fixture::add_collaborator(&mut e);
    let q = "MATCH (s)-[:reviewerOf]->(p:Paper) AS collaborator RETURN p.name";
    assert!(e.query(ADMIN, q).unwrap().is_empty());
    let admin = e.query(ADMIN, "MATCH (s)-[:reviewerOf]->(p:Paper) RETURN p.name").unwrap();
    assert_eq!(texts(&admin), ["ScienceKG"]);
}

#[test]
fn fixture_interest_and_unknown_keys() {
    let (e, _) = fixture::build();
    let rows = e.query(ADMIN, "MATCH (s)-[:interest]->(t) RETURN t.name, t.nope").unwrap();
    assert_eq!(texts(&rows), ["NLP | null"]);
}

#[test]
fn unknown_role_is_not_found() {
    let (e, _) = fixture::build();
    let err = e.query(ADMIN, "MATCH (a) AS ghost RETURN a").unwrap_err();
    assert!(matches!(err, prkg_core::Error::NotFound(_)), "{err}");
}

#[test]
fn diagnostics_carry_positions() {
    let err = parse_query("MATCH (a RETURN a").unwrap_err();
    assert_eq!((err.kind, err.line, err.column), (ErrorKind::Syntax, 1, 10));
    assert!(err.expected.contains("`)`"), "{:?}", err.expected);
    let err = parse_query("MATCH (a)\nRETURN b").unwrap_err();
    assert_eq!((err.kind, err.line, err.column), (ErrorKind::Semantic, 2, 8));
}

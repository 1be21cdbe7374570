use prkg_core::{props, Engine, NodeId, PartialDate, Properties, PropertyValue, RelId, TemporalInterval};

/// Ids of the elements of the worked example, in creation order.
#[derive(Debug, Clone, Copy)]
pub struct FixtureIds {
    pub sunita: NodeId,
    pub iacs: NodeId,
    pub iiser: NodeId,
    pub nlp: NodeId,
    pub topic_modeling: NodeId,
    pub lda: NodeId,
    pub ctm: NodeId,
    pub nlp_lab: NodeId,
    pub spert: NodeId,
    pub science_kg: NodeId,
    pub phdsel: NodeId,
    pub cclinc: NodeId,
    pub translation: NodeId,
    pub wsd: NodeId,
    pub works_iiser: RelId,
    pub works_iacs: RelId,
    pub interest: RelId,
    pub task: RelId,
    pub method_lda: RelId,
    pub method_ctm: RelId,
    pub manages: RelId,
    pub writes: RelId,
    pub reviewer_of: RelId,
    pub member_of: RelId,
    pub reads: RelId,
    pub cclinc_task: RelId,
    pub translation_method: RelId,
}

fn date(s: &str) -> PartialDate {
    s.parse().expect("fixture date")
}

fn named(name: &str) -> Properties {
    props([("name", name)])
}

/// Builds the 14-node, 13-relationship example graph around Sunita.
pub fn build() -> (Engine, FixtureIds) {
    let mut e = Engine::new("Sunita").unwrap();
    let g = &mut e.graph;
    let sunita = g.owner();
    let mut node = |label: &str, p: Properties| g.add_node([label], p).unwrap();
    let iacs = node("Institution", named("IACS"));
    let iiser = node("Institution", named("IISER Kolkata"));
    let nlp = node("Topic", named("NLP"));
    let topic_modeling = node("Task", named("topic modeling"));
    let lda = node("Method", named("LDA"));
    let ctm = node("Method", named("CTM"));
    let nlp_lab = node("Lab", named("NLP Lab"));
    let mut spert_props = named("SpERT.PL");
    spert_props.insert("status".into(), PropertyValue::text("underReview"));
    let spert = node("Paper", spert_props);
    let science_kg = node("Paper", named("ScienceKG"));
    let phdsel = node("Committee", named("PhD Selection Committee"));
    let cclinc = node("Paper", named("CCLINC"));
    let translation = node("Task", named("translation"));
    let wsd = node("Method", named("word sense disambiguation"));

    let u = TemporalInterval::UNBOUNDED;
    let mut rel = |s: NodeId, d: NodeId, t: &str, v: TemporalInterval| {
        g.add_relationship(s, d, t, v, Properties::new()).unwrap()
    };
    let works_iiser = rel(
        sunita,
        iiser,
        "worksFor",
        TemporalInterval::new(Some(date("2014")), Some(date("2018"))).unwrap(),
    );
    let works_iacs = rel(sunita, iacs, "worksFor", TemporalInterval::since(date("2018")));
    let interest = rel(sunita, nlp, "interest", u);
    let task = rel(sunita, topic_modeling, "task", u);
    let method_lda = rel(topic_modeling, lda, "method", u);
    let method_ctm = rel(topic_modeling, ctm, "method", u);
    let manages = rel(sunita, nlp_lab, "manages", u);
    let writes = rel(sunita, spert, "writes", u);
    let reviewer_of = rel(sunita, science_kg, "reviewerOf", u);
    let member_of = rel(sunita, phdsel, "memberOf", u);
    let reads = rel(sunita, cclinc, "reads", u);
    let cclinc_task = rel(cclinc, translation, "task", u);
    let translation_method = rel(translation, wsd, "method", u);

    let ids = FixtureIds {
        sunita,
        iacs,
        iiser,
        nlp,
        topic_modeling,
        lda,
        ctm,
        nlp_lab,
        spert,
        science_kg,
        phdsel,
        cclinc,
        translation,
        wsd,
        works_iiser,
        works_iacs,
        interest,
        task,
        method_lda,
        method_ctm,
        manages,
        writes,
        reviewer_of,
        member_of,
        reads,
        cclinc_task,
        translation_method,
    };
    (e, ids)
}

/// Adds the collaborator role: a copy of admin that cannot see committees,
/// reviewing edges or unpublished papers, and cannot write.
pub fn add_collaborator(e: &mut Engine) {
    use prkg_core::access::ADMIN;
    use prkg_core::{AccessRule, Privilege, Scope};
    e.copy_role(ADMIN, "collaborator", ADMIN).unwrap();
    let rules = [
        AccessRule::deny(Privilege::Read, Scope::NodeLabel { label: "Committee".into() }),
        AccessRule::deny(Privilege::Traverse, Scope::RelType { name: "reviewerOf".into() }),
        AccessRule::deny(Privilege::Write, Scope::Graph),
        AccessRule::deny(
            Privilege::Read,
            Scope::PropertyPredicate {
                label: "Paper".into(),
                key: "status".into(),
                values: ["underReview", "inProgress"].map(String::from).into(),
            },
        ),
    ];
    for rule in rules {
        e.add_rule(ADMIN, "collaborator", rule).unwrap();
    }
}

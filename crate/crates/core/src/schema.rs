//! Research-domain vocabulary. Checks are advisory: they produce warnings
//! and never block a mutation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_token, ExternalLink, Graph, LinkSource, Node, NodeId};

pub const BUILTIN_LABELS: [&str; 17] = [
    "Researcher",
    "Institution",
    "Topic",
    "Task",
    "Method",
    "Tool",
    "Dataset",
    "Metric",
    "Paper",
    "Lab",
    "Machine",
    "Committee",
    "Conference",
    "Course",
    "Project",
    "Talk",
    "Equipment",
];

// (name, sources, targets, temporal)
const BUILTIN_RELATIONS: [(&str, &[&str], &[&str], bool); 17] = [
    ("worksFor", &["Researcher"], &["Institution"], true),
    ("interest", &["Researcher"], &["Topic"], false),
    ("task", &["Researcher", "Paper"], &["Task"], false),
    ("method", &["Task"], &["Method"], false),
    ("tool", &["Task", "Researcher"], &["Tool"], false),
    ("dataset", &["Task"], &["Dataset"], false),
    ("metric", &["Task"], &["Metric"], false),
    ("writes", &["Researcher"], &["Paper"], false),
    ("reads", &["Researcher"], &["Paper"], false),
    ("reviewerOf", &["Researcher"], &["Paper"], false),
    ("memberOf", &["Researcher"], &["Committee"], false),
    ("manages", &["Researcher"], &["Lab"], false),
    ("hasMachine", &["Lab"], &["Machine"], false),
    ("attends", &["Researcher"], &["Conference"], true),
    ("teaches", &["Researcher"], &["Course"], true),
    ("participatesIn", &["Researcher"], &["Project"], true),
    ("gives", &["Researcher"], &["Talk"], false),
];

/// Expected endpoint labels for a relation name. An empty label set accepts
/// any endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpec {
    pub name: String,
    #[serde(rename = "src", default)]
    pub expected_src_labels: BTreeSet<String>,
    #[serde(rename = "dst", default)]
    pub expected_dst_labels: BTreeSet<String>,
    #[serde(default)]
    pub temporal_expected: bool,
}

impl RelationSpec {
    pub fn new<'a>(
        name: &str,
        src: impl IntoIterator<Item = &'a str>,
        dst: impl IntoIterator<Item = &'a str>,
        temporal_expected: bool,
    ) -> Self {
        RelationSpec {
            name: name.to_string(),
            expected_src_labels: src.into_iter().map(String::from).collect(),
            expected_dst_labels: dst.into_iter().map(String::from).collect(),
            temporal_expected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    labels: BTreeSet<String>,
    relations: BTreeMap<String, RelationSpec>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

fn is_builtin_relation(name: &str) -> bool {
    BUILTIN_RELATIONS.iter().any(|(n, ..)| *n == name)
}

fn fmt_labels(labels: &BTreeSet<String>) -> String {
    labels.iter().cloned().collect::<Vec<_>>().join("|")
}

impl Registry {
    pub fn builtin() -> Self {
        let relations = BUILTIN_RELATIONS
            .iter()
            .map(|&(name, src, dst, temporal)| {
                (
                    name.to_string(),
                    RelationSpec::new(name, src.iter().copied(), dst.iter().copied(), temporal),
                )
            })
            .collect();
        Registry {
            labels: BUILTIN_LABELS.iter().map(|s| s.to_string()).collect(),
            relations,
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSpec> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = &RelationSpec> {
        self.relations.values()
    }

    /// Adds a user relation. Built-in names cannot be shadowed; re-registering
    /// a user relation replaces it.
    pub fn register_relation(&mut self, spec: RelationSpec) -> Result<&mut Self> {
        check_token("relation name", &spec.name)?;
        if is_builtin_relation(&spec.name) {
            return Err(Error::conflict(format!(
                "relation {:?} is built in and cannot be redefined",
                spec.name
            )));
        }
        for label in spec.expected_src_labels.iter().chain(&spec.expected_dst_labels) {
            check_token("label", label)?;
            self.labels.insert(label.clone());
        }
        self.relations.insert(spec.name.clone(), spec);
        Ok(self)
    }

    /// Warnings for a triple whose endpoints carry unexpected labels.
    /// Unknown relation names are accepted silently, except `usesX` spellings
    /// of a known bare relation `x`, which are flagged as non-canonical.
    pub fn check_triple(
        &self,
        src_labels: &BTreeSet<String>,
        rel_type: &str,
        dst_labels: &BTreeSet<String>,
    ) -> Vec<String> {
        let Some(spec) = self.relations.get(rel_type) else {
            return self.canonical_hint(rel_type).into_iter().collect();
        };
        let mut warnings = Vec::new();
        let fits = |expected: &BTreeSet<String>, actual: &BTreeSet<String>| {
            expected.is_empty() || !expected.is_disjoint(actual)
        };
        if !fits(&spec.expected_src_labels, src_labels) {
            warnings.push(format!(
                "{rel_type} expects source labelled {} but got {}",
                fmt_labels(&spec.expected_src_labels),
                fmt_labels(src_labels)
            ));
        }
        if !fits(&spec.expected_dst_labels, dst_labels) {
            warnings.push(format!(
                "{rel_type} expects target labelled {} but got {}",
                fmt_labels(&spec.expected_dst_labels),
                fmt_labels(dst_labels)
            ));
        }
        warnings
    }

    fn canonical_hint(&self, rel_type: &str) -> Option<String> {
        let rest = rel_type.strip_prefix("uses")?;
        let mut chars = rest.chars();
        let first = chars.next()?;
        if !first.is_uppercase() {
            return None;
        }
        let bare: String = first.to_lowercase().chain(chars).collect();
        self.relations
            .contains_key(&bare)
            .then(|| format!("{rel_type} is a non-canonical spelling of relation {bare}"))
    }
}

pub(crate) fn check_absolute_uri(uri: &str) -> Result<()> {
    url::Url::parse(uri)
        .map(|_| ())
        .map_err(|e| Error::invalid(format!("{uri:?} is not an absolute URI: {e}")))
}

impl Graph {
    /// Attaches a link to an entity in an external knowledge base.
    pub fn set_external_link(&mut self, node: NodeId, source: LinkSource, uri: &str) -> Result<&Node> {
        check_absolute_uri(uri)?;
        if uri.chars().any(|c| c.is_whitespace() || c == '<' || c == '>' || c == '"') {
            return Err(Error::invalid(format!("{uri:?} contains characters not allowed in a URI")));
        }
        let n = self.node_mut(node)?;
        if n.external_links.iter().any(|l| l.source == source && l.uri == uri) {
            return Err(Error::conflict(format!(
                "node {node} already links to {} {uri}",
                source.as_str()
            )));
        }
        n.external_links.push(ExternalLink {
            source,
            uri: uri.to_string(),
        });
        Ok(n)
    }
}

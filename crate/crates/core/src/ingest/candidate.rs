use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::inbox::Inbox;
use crate::error::{Error, Result};
use crate::graph::{check_token, Graph, NodeId, RelId};
use crate::schema::Registry;
use crate::temporal::TemporalInterval;
use crate::value::{Properties, PropertyValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateSource {
    Paper,
    Conversation,
    Activity,
    Manual,
}

impl fmt::Display for CandidateSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CandidateSource::Paper => "paper",
            CandidateSource::Conversation => "conversation",
            CandidateSource::Activity => "activity",
            CandidateSource::Manual => "manual",
        })
    }
}

/// A fact proposed by an extractor, with its confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateTriple {
    pub head: String,
    pub head_label: String,
    pub rel: String,
    pub tail: String,
    pub tail_label: String,
    pub confidence: f64,
    pub source: CandidateSource,
    #[serde(rename = "prov", default, skip_serializing_if = "String::is_empty")]
    pub provenance: String,
}

impl CandidateTriple {
    pub fn new(
        (head, head_label): (&str, &str),
        rel: &str,
        (tail, tail_label): (&str, &str),
        confidence: f64,
        source: CandidateSource,
    ) -> Self {
        CandidateTriple {
            head: head.to_string(),
            head_label: head_label.to_string(),
            rel: rel.to_string(),
            tail: tail.to_string(),
            tail_label: tail_label.to_string(),
            confidence,
            source,
            provenance: String::new(),
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::invalid(format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        if self.head.trim().is_empty() || self.tail.trim().is_empty() {
            return Err(Error::invalid("head and tail must be non-empty"));
        }
        check_token("relation", &self.rel)?;
        check_token("head label", &self.head_label)?;
        check_token("tail label", &self.tail_label)?;
        Ok(())
    }
}

impl fmt::Display for CandidateTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} :{}) -{}-> ({} :{}) @ {}",
            self.head, self.head_label, self.rel, self.tail, self.tail_label, self.confidence
        )
    }
}

/// Confidence cut-offs: at or above `accept` merges, at or below `reject`
/// drops, anything between goes to the inbox.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub accept: f64,
    pub reject: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            accept: 0.9,
            reject: 0.25,
        }
    }
}

impl Thresholds {
    pub fn new(accept: f64, reject: f64) -> Result<Self> {
        let t = Thresholds { accept, reject };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<()> {
        if 0.0 <= self.reject && self.reject < self.accept && self.accept <= 1.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "thresholds must satisfy 0 <= reject < accept <= 1 (got reject={}, accept={})",
                self.reject, self.accept
            )))
        }
    }
}

/// Outcome of merging one triple into the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeReport {
    pub head: NodeId,
    pub tail: NodeId,
    pub relationship: RelId,
    pub created_nodes: Vec<NodeId>,
    /// The fact was already present; nothing changed.
    pub duplicate: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SubmitReport {
    pub merged: usize,
    pub queued: usize,
    pub dropped: usize,
    /// Merged candidates that were already in the graph.
    pub duplicates: usize,
    /// High-confidence candidates queued because merging them would have
    /// changed the orphan set.
    pub unanchored: usize,
    pub warnings: Vec<String>,
}

impl SubmitReport {
    pub fn total(&self) -> usize {
        self.merged + self.queued + self.dropped
    }
}

/// Merges a candidate. Endpoints are resolved by case-insensitive name within
/// their label; missing ones are created. At least one endpoint must already
/// be connected to the owner and neither may be an orphan, so a merge leaves
/// the orphan set as it was.
pub fn merge_candidate(graph: &mut Graph, registry: &Registry, cand: &CandidateTriple) -> Result<MergeReport> {
    cand.check()?;
    let head = graph.find_by_name(&cand.head_label, &cand.head).map(|n| n.id);
    let tail = graph.find_by_name(&cand.tail_label, &cand.tail).map(|n| n.id);
    let orphans: BTreeSet<NodeId> = graph.orphans().into_iter().collect();
    let anchored = |n: Option<NodeId>| n.is_some_and(|id| !orphans.contains(&id));
    if !anchored(head) && !anchored(tail) {
        return Err(Error::conflict(format!(
            "neither {:?} nor {:?} is connected to the graph yet",
            cand.head, cand.tail
        )));
    }
    if let Some(id) = [head, tail].into_iter().flatten().find(|id| orphans.contains(id)) {
        return Err(Error::conflict(format!("node {id} is an orphan; link it by hand first")));
    }

    let warnings = {
        let labels = |id: Option<NodeId>, fallback: &str| -> BTreeSet<String> {
            id.and_then(|id| graph.node(id))
                .map(|n| n.labels.clone())
                .unwrap_or_else(|| BTreeSet::from([fallback.to_string()]))
        };
        registry.check_triple(&labels(head, &cand.head_label), &cand.rel, &labels(tail, &cand.tail_label))
    };

    if let (Some(h), Some(t)) = (head, tail) {
        if let Some(existing) = graph.find_duplicate(h, t, &cand.rel, &TemporalInterval::UNBOUNDED) {
            return Ok(MergeReport {
                head: h,
                tail: t,
                relationship: existing.id,
                created_nodes: Vec::new(),
                duplicate: true,
                warnings,
            });
        }
    }

    let mut created_nodes = Vec::new();
    let mut resolve = |graph: &mut Graph, found: Option<NodeId>, label: &str, name: &str| -> Result<NodeId> {
        if let Some(id) = found {
            return Ok(id);
        }
        let props = Properties::from([("name".to_string(), PropertyValue::text(name))]);
        let id = graph.add_node([label], props)?;
        created_nodes.push(id);
        Ok(id)
    };
    let h = resolve(graph, head, &cand.head_label, &cand.head)?;
    // a self-referencing triple resolves both ends to the same new node
    let tail = tail.or_else(|| {
        (cand.head_label == cand.tail_label && cand.head.to_lowercase() == cand.tail.to_lowercase()).then_some(h)
    });
    let t = resolve(graph, tail, &cand.tail_label, &cand.tail)?;

    let mut rel_props = Properties::from([
        ("confidence".to_string(), PropertyValue::Decimal(cand.confidence)),
        ("source".to_string(), PropertyValue::text(cand.source.to_string())),
    ]);
    if !cand.provenance.is_empty() {
        rel_props.insert("prov".to_string(), PropertyValue::text(cand.provenance.clone()));
    }
    let relationship = graph.add_relationship(h, t, &cand.rel, TemporalInterval::UNBOUNDED, rel_props)?;
    Ok(MergeReport {
        head: h,
        tail: t,
        relationship,
        created_nodes,
        duplicate: false,
        warnings,
    })
}

/// Routes a batch by confidence. The whole batch is refused if any candidate
/// is malformed.
pub fn submit_candidates(
    graph: &mut Graph,
    inbox: &mut Inbox,
    thresholds: &Thresholds,
    registry: &Registry,
    candidates: &[CandidateTriple],
) -> Result<SubmitReport> {
    thresholds.check()?;
    for (i, c) in candidates.iter().enumerate() {
        c.check()
            .map_err(|e| Error::invalid(format!("candidate {}: {e}", i + 1)))?;
    }
    let mut report = SubmitReport::default();
    for cand in candidates {
        if cand.confidence >= thresholds.accept {
            match merge_candidate(graph, registry, cand) {
                Ok(merge) => {
                    report.merged += 1;
                    report.duplicates += usize::from(merge.duplicate);
                    report.warnings.extend(merge.warnings);
                }
                Err(Error::Conflict(_)) => {
                    inbox.push(cand.clone());
                    report.queued += 1;
                    report.unanchored += 1;
                }
                Err(e) => return Err(e),
            }
        } else if cand.confidence > thresholds.reject {
            inbox.push(cand.clone());
            report.queued += 1;
        } else {
            report.dropped += 1;
        }
    }
    Ok(report)
}

/// Parses a triple file: one JSON object per line, blank lines ignored.
pub fn parse_triples(text: &str) -> Result<Vec<CandidateTriple>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let cand: CandidateTriple = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: line_no,
            column: e.column(),
            message: e.to_string(),
        })?;
        cand.check().map_err(|e| Error::Parse {
            line: line_no,
            column: 1,
            message: e.to_string(),
        })?;
        out.push(cand);
    }
    Ok(out)
}

pub fn import_triples(
    graph: &mut Graph,
    inbox: &mut Inbox,
    thresholds: &Thresholds,
    registry: &Registry,
    path: &Path,
) -> Result<SubmitReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let candidates = parse_triples(&text)?;
    submit_candidates(graph, inbox, thresholds, registry, &candidates)
}

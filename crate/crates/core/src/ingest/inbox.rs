use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::candidate::{merge_candidate, CandidateTriple, MergeReport};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::schema::Registry;
use crate::temporal::PartialDate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryState {
    Pending,
    Accepted,
    Rejected,
}

impl fmt::Display for EntryState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryState::Pending => "pending",
            EntryState::Accepted => "accepted",
            EntryState::Rejected => "rejected",
        })
    }
}

impl FromStr for EntryState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pending" => Ok(EntryState::Pending),
            "accepted" => Ok(EntryState::Accepted),
            "rejected" => Ok(EntryState::Rejected),
            _ => Err(Error::invalid(format!("unknown inbox state {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InboxEntry {
    pub id: u64,
    pub candidate: CandidateTriple,
    pub state: EntryState,
    pub decided_at: Option<PartialDate>,
}

/// Candidates waiting for a human decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Inbox {
    entries: BTreeMap<u64, InboxEntry>,
    next_id: u64,
}

impl Default for Inbox {
    fn default() -> Self {
        Inbox {
            entries: BTreeMap::new(),
            next_id: 1,
        }
    }
}

impl Inbox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(entries: Vec<InboxEntry>, next_id: u64) -> Result<Self> {
        let mut map = BTreeMap::new();
        for entry in entries {
            let record = format!("inbox entry {}", entry.id);
            if entry.id >= next_id {
                return Err(Error::Integrity {
                    record,
                    message: format!("id not below next_id {next_id}"),
                });
            }
            entry.candidate.check().map_err(|e| Error::Integrity {
                record: record.clone(),
                message: e.to_string(),
            })?;
            if map.insert(entry.id, entry).is_some() {
                return Err(Error::Integrity {
                    record,
                    message: "duplicate id".into(),
                });
            }
        }
        Ok(Inbox {
            entries: map,
            next_id,
        })
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&InboxEntry> {
        self.entries.get(&id)
    }

    pub(crate) fn push(&mut self, candidate: CandidateTriple) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        self.entries.insert(
            id,
            InboxEntry {
                id,
                candidate,
                state: EntryState::Pending,
                decided_at: None,
            },
        );
        id
    }

    /// Entries in id order, optionally restricted to one state.
    pub fn list(&self, state: Option<EntryState>) -> Vec<&InboxEntry> {
        self.entries
            .values()
            .filter(|e| state.is_none_or(|s| e.state == s))
            .collect()
    }

    fn pending_mut(&mut self, id: u64) -> Result<&mut InboxEntry> {
        let entry = self
            .entries
            .get_mut(&id)
            .ok_or_else(|| Error::not_found(format!("inbox entry {id}")))?;
        if entry.state != EntryState::Pending {
            return Err(Error::conflict(format!("inbox entry {id} is already {}", entry.state)));
        }
        Ok(entry)
    }

    /// Merges a pending entry into the graph and marks it accepted. If the
    /// merge fails the entry stays pending.
    pub fn accept(
        &mut self,
        graph: &mut Graph,
        registry: &Registry,
        id: u64,
        decided_at: Option<PartialDate>,
    ) -> Result<MergeReport> {
        let entry = self.pending_mut(id)?;
        let report = merge_candidate(graph, registry, &entry.candidate)?;
        entry.state = EntryState::Accepted;
        entry.decided_at = decided_at;
        Ok(report)
    }

    /// Marks a pending entry rejected. The graph is not touched.
    pub fn reject(&mut self, id: u64, decided_at: Option<PartialDate>) -> Result<&InboxEntry> {
        let entry = self.pending_mut(id)?;
        entry.state = EntryState::Rejected;
        entry.decided_at = decided_at;
        Ok(entry)
    }
}

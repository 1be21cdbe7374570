//! Confidence-gated ingestion of extracted triples, the human validation
//! inbox, and structured imports (triple files, BibTeX).

mod bibtex;
mod candidate;
mod inbox;

pub use bibtex::{import_bibliography, import_bibtex, parse_bibtex, BibEntry, BibReport, Bibliography};
pub use candidate::{
    import_triples, merge_candidate, parse_triples, submit_candidates, CandidateSource, CandidateTriple,
    MergeReport, SubmitReport, Thresholds,
};
pub use inbox::{EntryState, Inbox, InboxEntry};

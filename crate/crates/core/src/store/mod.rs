//! Persistence: the native snapshot file and one-way RDF export.

mod rdf;
mod snapshot;

pub use rdf::{export_rdf, rdf_lines, DEFAULT_BASE};
pub use snapshot::{
    from_snapshot_str, load_snapshot, save_snapshot, to_snapshot_string, write_atomic, FORMAT_TAG, FORMAT_VERSION,
};

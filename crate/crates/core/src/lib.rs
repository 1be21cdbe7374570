//! Embedded engine for a personal research knowledge graph: a temporally
//! annotated labeled property graph centred on one researcher, with an
//! advisory schema, role-based sharing, a pattern query language,
//! confidence-gated ingestion and snapshot / RDF persistence.

pub mod access;
pub mod engine;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod query;
pub mod schema;
pub mod store;
pub mod temporal;
pub mod value;

pub use access::{view_as, AccessRule, Decision, Effect, Element, Privilege, Role, RoleTable, Scope, View, WriteKind, WriteTarget};

pub use engine::Engine;
pub use error::{Error, Result};
pub use graph::{Direction, ElementId, ExternalLink, Graph, LinkSource, Node, NodeId, RelId, Relationship, ValidationReport};
pub use schema::{Registry, RelationSpec};
pub use temporal::{PartialDate, TemporalInterval};
pub use value::{props, Properties, PropertyUpdate, PropertyValue};

//! Pattern queries over a single path, e.g.
//! `MATCH (s:Researcher)-[:worksFor]->(i:Institution) AT 2017 RETURN i.name`.

mod ast;
mod eval;
mod parser;

pub use ast::{EdgeDirection, EdgePattern, Literal, NodePattern, Query, ReturnItem};
pub use eval::{evaluate, evaluate_as, evaluate_in_view, Row, Value};
pub use parser::{parse_query, ErrorKind, QueryError};

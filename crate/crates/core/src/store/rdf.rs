//! N-Triples export.
//!
//! Nodes become `<base node/ID>` resources with one triple per label,
//! property and external link. Relationships carry validity and properties,
//! so each one is reified as `<base rel/ID>` with subject, predicate and
//! object triples plus optional start/end and property triples.
//!
//! | element                | predicate                 | object                     |
//! |------------------------|---------------------------|----------------------------|
//! | node label             | `meta/label`              | `<base label/LABEL>`       |
//! | node property          | `prop/KEY`                | literal                    |
//! | external link          | `meta/sameAs`             | `<uri>`                    |
//! | relationship source    | `meta/subject`            | `<base node/SRC>`          |
//! | relationship type      | `meta/predicate`          | `<base reltype/TYPE>`      |
//! | relationship target    | `meta/object`             | `<base node/DST>`          |
//! | validity bounds        | `meta/start`, `meta/end`  | `xsd:gYear`/`gYearMonth`/`date` literal |
//! | relationship property  | `prop/KEY`                | literal                    |

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::access::View;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::temporal::PartialDate;
use crate::value::PropertyValue;

pub const DEFAULT_BASE: &str = "urn:prkg:";

const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// Percent-encodes everything outside the unreserved set so labels, keys and
/// relation types are safe inside an IRI.
fn iri_segment(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
            out.push(b as char);
        } else {
            let _ = write!(out, "%{b:02X}");
        }
    }
    out
}

fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn typed(lexical: &str, datatype: &str) -> String {
    format!("\"{}\"^^<{XSD}{datatype}>", escape_literal(lexical))
}

fn date_literal(d: &PartialDate) -> String {
    let datatype = match (d.month_part(), d.day_part()) {
        (None, _) => "gYear",
        (Some(_), None) => "gYearMonth",
        (Some(_), Some(_)) => "date",
    };
    typed(&d.to_string(), datatype)
}

fn literal(v: &PropertyValue) -> String {
    match v {
        PropertyValue::Text(s) => format!("\"{}\"", escape_literal(s)),
        PropertyValue::Integer(i) => typed(&i.to_string(), "integer"),
        PropertyValue::Decimal(x) => typed(&format!("{x:?}"), "double"),
        PropertyValue::Boolean(b) => typed(&b.to_string(), "boolean"),
        PropertyValue::Date(d) => date_literal(d),
        PropertyValue::List(items) => {
            format!("\"{}\"", escape_literal(&serde_json::to_string(items).expect("strings serialize")))
        }
    }
}

/// All export lines, sorted, for the whole graph or the part of it in `view`.
pub fn rdf_lines(graph: &Graph, view: Option<&View>, base: &str) -> Vec<String> {
    let iri = |path: String| format!("<{base}{path}>");
    let meta = |name: &str| iri(format!("meta/{name}"));
    let prop = |key: &str| iri(format!("prop/{}", iri_segment(key)));
    let mut lines = Vec::new();

    for node in graph.nodes().filter(|n| view.is_none_or(|v| v.has_node(n.id))) {
        let subject = iri(format!("node/{}", node.id));
        for label in &node.labels {
            lines.push(format!(
                "{subject} {} {} .",
                meta("label"),
                iri(format!("label/{}", iri_segment(label)))
            ));
        }
        for (key, value) in &node.properties {
            if view.is_some_and(|v| v.is_masked(node.id, key)) {
                continue;
            }
            lines.push(format!("{subject} {} {} .", prop(key), literal(value)));
        }
        for link in &node.external_links {
            lines.push(format!("{subject} {} <{}> .", meta("sameAs"), link.uri));
        }
    }

    for rel in graph.relationships().filter(|r| view.is_none_or(|v| v.has_rel(r.id))) {
        let subject = iri(format!("rel/{}", rel.id));
        lines.push(format!("{subject} {} {} .", meta("subject"), iri(format!("node/{}", rel.src))));
        lines.push(format!(
            "{subject} {} {} .",
            meta("predicate"),
            iri(format!("reltype/{}", iri_segment(&rel.rel_type)))
        ));
        lines.push(format!("{subject} {} {} .", meta("object"), iri(format!("node/{}", rel.dst))));
        if let Some(start) = &rel.validity.start {
            lines.push(format!("{subject} {} {} .", meta("start"), date_literal(start)));
        }
        if let Some(end) = &rel.validity.end {
            lines.push(format!("{subject} {} {} .", meta("end"), date_literal(end)));
        }
        for (key, value) in &rel.properties {
            lines.push(format!("{subject} {} {} .", prop(key), literal(value)));
        }
    }
    lines.sort();
    lines
}

/// Writes the export to `path` and returns the number of triples.
pub fn export_rdf(graph: &Graph, view: Option<&View>, base: &str, path: &Path) -> Result<usize> {
    crate::schema::check_absolute_uri(base)?;
    let lines = rdf_lines(graph, view, base);
    let mut text = lines.join("\n");
    if !lines.is_empty() {
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(lines.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LinkSource;
    use crate::temporal::TemporalInterval;
    use crate::value::{props, Properties};

    #[test]
    fn single_owner_node_gives_two_triples() {
        let g = Graph::new("Sunita").unwrap();
        let lines = rdf_lines(&g, None, DEFAULT_BASE);
        assert_eq!(
            lines,
            vec![
                "<urn:prkg:node/1> <urn:prkg:meta/label> <urn:prkg:label/Researcher> .",
                "<urn:prkg:node/1> <urn:prkg:prop/name> \"Sunita\" .",
            ]
        );
    }

    #[test]
    fn works_for_since_2018_is_four_triples() {
        let mut g = Graph::new("Sunita").unwrap();
        let iacs = g.add_node(["Institution"], Properties::new()).unwrap();
        let r = g
            .add_relationship(g.owner(), iacs, "worksFor", TemporalInterval::since("2018".parse().unwrap()), Properties::new())
            .unwrap();
        let prefix = format!("<urn:prkg:rel/{r}>");
        let rel_lines: Vec<String> = rdf_lines(&g, None, DEFAULT_BASE)
            .into_iter()
            .filter(|l| l.starts_with(&prefix))
            .collect();
        assert_eq!(rel_lines.len(), 4);
        assert!(rel_lines.contains(&format!(
            "{prefix} <urn:prkg:meta/start> \"2018\"^^<http://www.w3.org/2001/XMLSchema#gYear> ."
        )));
        assert!(rel_lines.contains(&format!("{prefix} <urn:prkg:meta/predicate> <urn:prkg:reltype/worksFor> .")));
    }

    #[test]
    fn literals_links_and_custom_base() {
        let mut g = Graph::new("Su \"Ni\"\nTa").unwrap();
        let n = g
            .add_node(["Paper"], props([("pages", PropertyValue::Integer(12)), ("odd key", PropertyValue::Boolean(true))]))
            .unwrap();
        g.set_external_link(n, LinkSource::Orkg, "https://www.orkg.org/orkg/resource/R111035").unwrap();
        let lines = rdf_lines(&g, None, "http://example.org/kg/");
        assert!(lines.contains(&"<http://example.org/kg/node/1> <http://example.org/kg/prop/name> \"Su \\\"Ni\\\"\\nTa\" .".to_string()));
        assert!(lines.contains(&format!(
            "<http://example.org/kg/node/{n}> <http://example.org/kg/meta/sameAs> <https://www.orkg.org/orkg/resource/R111035> ."
        )));
        assert!(lines.iter().any(|l| l.contains("prop/odd%20key")));
        assert!(lines.iter().any(|l| l.contains("\"12\"^^<http://www.w3.org/2001/XMLSchema#integer>")));
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(sorted, lines);
    }

    #[test]
    fn export_writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.nt");
        let g = Graph::new("Sunita").unwrap();
        assert_eq!(export_rdf(&g, None, DEFAULT_BASE, &path).unwrap(), 2);
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 2);
        assert!(export_rdf(&g, None, "not a base", &path).is_err());
    }
}

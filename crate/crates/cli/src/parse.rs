//! Parsing of command-line argument shapes that clap leaves as strings.

use std::collections::BTreeSet;

use prkg_core::{NodeId, PartialDate, Properties, PropertyValue, Scope};

use crate::error::{usage, CliError};

/// `key=value` pairs; values are typed loosely (integer, boolean, decimal,
/// else text).
pub fn properties(pairs: &[String]) -> Result<Properties, CliError> {
    let mut props = Properties::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("property {pair:?} is not of the form key=value")))?;
        if k.is_empty() {
            return Err(usage(format!("property {pair:?} has an empty key")));
        }
        props.insert(k.to_string(), PropertyValue::parse_loose(v));
    }
    Ok(props)
}

pub fn date(s: &str) -> Result<PartialDate, CliError> {
    s.parse::<PartialDate>().map_err(|e| usage(format!("date {s:?}: {e}")))
}

/// Scope words as accepted by `grant` and `deny`.
pub fn scope(words: &[String]) -> Result<Scope, CliError> {
    let w: Vec<&str> = words.iter().map(String::as_str).collect();
    let scope = match w.as_slice() {
        ["graph"] => Scope::Graph,
        ["node-label", label] => Scope::NodeLabel { label: label.to_string() },
        ["rel-type", name] => Scope::RelType { name: name.to_string() },
        ["node", id] => Scope::Node {
            id: id.parse::<NodeId>().map_err(|_| usage(format!("node id {id:?} is not a number")))?,
        },
        ["prop", label, key] => Scope::NodeProperty {
            label: label.to_string(),
            key: key.to_string(),
        },
        ["prop-pred", label, key, values] => Scope::PropertyPredicate {
            label: label.to_string(),
            key: key.to_string(),
            values: values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(String::from)
                .collect::<BTreeSet<_>>(),
        },
        _ => {
            return Err(usage(format!(
                "bad scope {:?}; expected one of: graph | node-label L | rel-type T | node ID | prop L KEY | prop-pred L KEY V1,V2",
                w.join(" ")
            )))
        }
    };
    scope.check().map_err(|e| usage(e.to_string()))?;
    Ok(scope)
}

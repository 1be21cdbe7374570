use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::temporal::PartialDate;

/// A property value on a node or relationship.
///
/// Serialized externally tagged (`{"text": "..."}`, `{"integer": 3}`, ...)
/// so that a text `"2018"` and a date `2018` stay distinct across a save.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyValue {
    Text(String),
    Integer(i64),
    Decimal(f64),
    Boolean(bool),
    Date(PartialDate),
    List(Vec<String>),
}

pub type Properties = BTreeMap<String, PropertyValue>;

impl PropertyValue {
    pub fn text(s: impl Into<String>) -> Self {
        PropertyValue::Text(s.into())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PropertyValue::Decimal(x) if !x.is_finite() => {
                Err(Error::invalid(format!("decimal value {x} is not finite")))
            }
            PropertyValue::List(items) if items.iter().any(String::is_empty) => {
                Err(Error::invalid("list elements must be non-empty text"))
            }
            _ => Ok(()),
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            PropertyValue::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Parses a loosely typed command-line value: integers, decimals and
    /// booleans are recognised, everything else is text.
    pub fn parse_loose(raw: &str) -> Self {
        if let Ok(i) = raw.parse::<i64>() {
            return PropertyValue::Integer(i);
        }
        match raw {
            "true" => return PropertyValue::Boolean(true),
            "false" => return PropertyValue::Boolean(false),
            _ => {}
        }
        if raw.contains('.') {
            if let Ok(x) = raw.parse::<f64>() {
                if x.is_finite() {
                    return PropertyValue::Decimal(x);
                }
            }
        }
        PropertyValue::Text(raw.to_string())
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Text(s) => f.write_str(s),
            PropertyValue::Integer(i) => write!(f, "{i}"),
            PropertyValue::Decimal(x) => write!(f, "{x}"),
            PropertyValue::Boolean(b) => write!(f, "{b}"),
            PropertyValue::Date(d) => write!(f, "{d}"),
            PropertyValue::List(items) => f.write_str(&items.join(", ")),
        }
    }
}

impl From<&str> for PropertyValue {
    fn from(s: &str) -> Self {
        PropertyValue::Text(s.to_string())
    }
}

impl From<String> for PropertyValue {
    fn from(s: String) -> Self {
        PropertyValue::Text(s)
    }
}

impl From<i64> for PropertyValue {
    fn from(i: i64) -> Self {
        PropertyValue::Integer(i)
    }
}

impl From<bool> for PropertyValue {
    fn from(b: bool) -> Self {
        PropertyValue::Boolean(b)
    }
}

/// One entry of a property update: either a new value or removal of the key.
#[derive(Debug, Clone, PartialEq)]
pub enum PropertyUpdate {
    Set(PropertyValue),
    Unset,
}

pub(crate) fn validate_properties(props: &Properties) -> Result<()> {
    for (key, value) in props {
        if key.is_empty() {
            return Err(Error::invalid("property key must be non-empty"));
        }
        value
            .validate()
            .map_err(|e| Error::invalid(format!("property {key:?}: {e}")))?;
    }
    Ok(())
}

/// Builds a property map from `(key, value)` pairs.
pub fn props<K, V, I>(pairs: I) -> Properties
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<PropertyValue>,
{
    pairs
        .into_iter()
        .map(|(k, v)| (k.into(), v.into()))
        .collect()
}

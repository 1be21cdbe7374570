use std::fmt;

use crate::temporal::PartialDate;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Str(String),
    Int(i64),
    Bool(bool),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Literal::Int(i) => write!(f, "{i}"),
            Literal::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodePattern {
    pub var: Option<String>,
    pub label: Option<String>,
    pub props: Vec<(String, Literal)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeDirection {
    /// `-[...]->`
    Outgoing,
    /// `<-[...]-`
    Incoming,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePattern {
    pub var: Option<String>,
    pub rel_type: Option<String>,
    pub direction: EdgeDirection,
    pub props: Vec<(String, Literal)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnItem {
    pub var: String,
    pub key: Option<String>,
}

/// A parsed `MATCH ... RETURN ...` query over a single path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub start: NodePattern,
    pub hops: Vec<(EdgePattern, NodePattern)>,
    pub at: Option<PartialDate>,
    pub as_role: Option<String>,
    pub returns: Vec<ReturnItem>,
}

impl Query {
    pub fn node_patterns(&self) -> impl Iterator<Item = &NodePattern> {
        std::iter::once(&self.start).chain(self.hops.iter().map(|(_, n)| n))
    }

    pub fn edge_patterns(&self) -> impl Iterator<Item = &EdgePattern> {
        self.hops.iter().map(|(e, _)| e)
    }
}

fn write_props(f: &mut fmt::Formatter<'_>, props: &[(String, Literal)]) -> fmt::Result {
    if props.is_empty() {
        return Ok(());
    }
    f.write_str(" {")?;
    for (i, (k, v)) in props.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{k}: {v}")?;
    }
    f.write_str("}")
}

fn write_var_label(f: &mut fmt::Formatter<'_>, var: &Option<String>, label: &Option<String>) -> fmt::Result {
    if let Some(v) = var {
        f.write_str(v)?;
    }
    if let Some(l) = label {
        write!(f, ":{l}")?;
    }
    Ok(())
}

impl fmt::Display for NodePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        write_var_label(f, &self.var, &self.label)?;
        write_props(f, &self.props)?;
        f.write_str(")")
    }
}

impl fmt::Display for EdgePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.direction {
            EdgeDirection::Outgoing => "-[",
            EdgeDirection::Incoming => "<-[",
        })?;
        write_var_label(f, &self.var, &self.rel_type)?;
        write_props(f, &self.props)?;
        f.write_str(match self.direction {
            EdgeDirection::Outgoing => "]->",
            EdgeDirection::Incoming => "]-",
        })
    }
}

impl fmt::Display for ReturnItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.var)?;
        if let Some(k) = &self.key {
            write!(f, ".{k}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MATCH {}", self.start)?;
        for (edge, node) in &self.hops {
            write!(f, "{edge}{node}")?;
        }
        if let Some(at) = &self.at {
            write!(f, " AT {at}")?;
        }
        if let Some(role) = &self.as_role {
            write!(f, " AS {role}")?;
        }
        f.write_str(" RETURN ")?;
        for (i, item) in self.returns.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

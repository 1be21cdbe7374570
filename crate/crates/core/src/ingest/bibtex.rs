//! Minimal BibTeX reader for publication lists.
//!
//! Handles `@type{key, field = value, ...}` entries with braced, quoted,
//! numeric or bare-word values joined by `#`. `@string`, `@comment` and
//! `@preamble` blocks are skipped with a warning; macros are not expanded.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{ElementId, Graph};
use crate::temporal::TemporalInterval;
use crate::value::{Properties, PropertyUpdate, PropertyValue};

const SUPPORTED_TYPES: [&str; 3] = ["article", "inproceedings", "book"];
const USED_FIELDS: [&str; 3] = ["author", "title", "year"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BibEntry {
    /// Lowercased entry type, e.g. `inproceedings`.
    pub entry_type: String,
    pub key: String,
    /// Lowercased field names with their values, in file order.
    pub fields: Vec<(String, String)>,
    pub line: usize,
}

impl BibEntry {
    pub fn field(&self, name: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    /// Authors split on the `and` separator.
    pub fn authors(&self) -> Vec<String> {
        let Some(raw) = self.field("author") else {
            return Vec::new();
        };
        let words: Vec<&str> = raw.split_whitespace().collect();
        words
            .split(|w| w.eq_ignore_ascii_case("and"))
            .map(|parts| parts.join(" "))
            .filter(|a| !a.is_empty())
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bibliography {
    pub entries: Vec<BibEntry>,
    pub warnings: Vec<String>,
}

struct Reader<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    _src: &'a str,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            _src: src,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn here(&self) -> (usize, usize) {
        (self.line, self.column)
    }

    fn expect(&mut self, want: char) -> Result<()> {
        self.skip_ws();
        let (line, col) = self.here();
        match self.bump() {
            Some(c) if c == want => Ok(()),
            Some(c) => Err(self.error(line, col, format!("expected {want:?}, found {c:?}"))),
            None => Err(self.error(line, col, format!("expected {want:?}, found end of input"))),
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || "_-:.+/'".contains(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    /// Reads a `{...}` group after its opening brace, returning the inner
    /// text with nested braces kept.
    fn braced(&mut self, open: (usize, usize)) -> Result<String> {
        let mut depth = 1;
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error(open.0, open.1, "unbalanced braces: `{` is never closed")),
                Some('{') => {
                    depth += 1;
                    s.push('{');
                }
                Some('}') => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(s);
                    }
                    s.push('}');
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn quoted(&mut self, open: (usize, usize)) -> Result<String> {
        let mut depth = 0;
        let mut s = String::new();
        loop {
            let (line, col) = self.here();
            match self.bump() {
                None => return Err(self.error(open.0, open.1, "unterminated quoted value")),
                Some('"') if depth == 0 => return Ok(s),
                Some('{') => {
                    depth += 1;
                    s.push('{');
                }
                Some('}') => {
                    if depth == 0 {
                        return Err(self.error(line, col, "unbalanced braces: unexpected `}` in quoted value"));
                    }
                    depth -= 1;
                    s.push('}');
                }
                Some(c) => s.push(c),
            }
        }
    }

    /// value := piece ("#" piece)*
    fn value(&mut self, warnings: &mut Vec<String>, key: &str) -> Result<String> {
        let mut out = String::new();
        loop {
            self.skip_ws();
            let open = self.here();
            match self.peek() {
                Some('{') => {
                    self.bump();
                    out.push_str(&self.braced(open)?);
                }
                Some('"') => {
                    self.bump();
                    out.push_str(&self.quoted(open)?);
                }
                Some(c) if c.is_ascii_digit() => out.push_str(&self.word()),
                Some(c) if c.is_alphabetic() => {
                    let name = self.word();
                    warnings.push(format!("{key}: macro `{name}` left unexpanded"));
                    out.push_str(&name);
                }
                Some(c) => return Err(self.error(open.0, open.1, format!("expected a field value, found {c:?}"))),
                None => return Err(self.error(open.0, open.1, "expected a field value, found end of input")),
            }
            self.skip_ws();
            if self.peek() == Some('#') {
                self.bump();
            } else {
                return Ok(out);
            }
        }
    }

    fn entry(&mut self, bib: &mut Bibliography) -> Result<()> {
        let (line, column) = self.here();
        self.bump(); // '@'
        self.skip_ws();
        let entry_type = self.word().to_lowercase();
        if entry_type.is_empty() {
            return Err(self.error(line, column, "missing entry type after `@`"));
        }
        self.skip_ws();
        let open_pos = self.here();
        let close = match self.bump() {
            Some('{') => '}',
            Some('(') => ')',
            _ => return Err(self.error(open_pos.0, open_pos.1, format!("expected `{{` after @{entry_type}"))),
        };
        if matches!(entry_type.as_str(), "comment" | "string" | "preamble") {
            if close == '}' {
                self.braced(open_pos)?;
            } else {
                self.skip_until_paren(open_pos)?;
            }
            bib.warnings.push(format!("line {line}: @{entry_type} block skipped"));
            return Ok(());
        }
        self.skip_ws();
        let mut key = String::new();
        while let Some(c) = self.peek() {
            if c == ',' || c == close || c.is_whitespace() {
                break;
            }
            if c == '{' || c == '}' {
                let (l, col) = self.here();
                return Err(self.error(l, col, format!("unexpected {c:?} in citation key")));
            }
            key.push(c);
            self.bump();
        }
        if key.is_empty() {
            return Err(self.error(line, column, format!("@{entry_type} entry has no citation key")));
        }
        let mut fields = Vec::new();
        loop {
            self.skip_ws();
            let (l, col) = self.here();
            match self.bump() {
                Some(c) if c == close => break,
                Some(',') => {}
                Some(c) => return Err(self.error(l, col, format!("expected `,` or {close:?}, found {c:?}"))),
                None => {
                    return Err(self.error(open_pos.0, open_pos.1, "unbalanced braces: entry is never closed"))
                }
            }
            self.skip_ws();
            if self.peek() == Some(close) {
                self.bump();
                break;
            }
            let (fl, fc) = self.here();
            let name = self.word().to_lowercase();
            if name.is_empty() {
                let found = self.peek().map_or("end of input".to_string(), |c| format!("{c:?}"));
                return Err(self.error(fl, fc, format!("expected a field name, found {found}")));
            }
            self.expect('=')?;
            let value = self.value(&mut bib.warnings, &key)?;
            fields.push((name, value));
        }
        bib.entries.push(BibEntry {
            entry_type,
            key,
            fields,
            line,
        });
        Ok(())
    }

    fn skip_until_paren(&mut self, open: (usize, usize)) -> Result<()> {
        let mut depth = 0i32;
        loop {
            match self.bump() {
                None => return Err(self.error(open.0, open.1, "unbalanced parentheses")),
                Some('(') => depth += 1,
                Some(')') if depth == 0 => return Ok(()),
                Some(')') => depth -= 1,
                _ => {}
            }
        }
    }
}

fn clean(value: &str) -> String {
    value
        .replace(['{', '}'], "")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses BibTeX text. Text outside `@` entries is ignored.
pub fn parse_bibtex(text: &str) -> Result<Bibliography> {
    let mut reader = Reader::new(text);
    let mut bib = Bibliography::default();
    while let Some(c) = reader.peek() {
        if c == '@' {
            reader.entry(&mut bib)?;
        } else {
            reader.bump();
        }
    }
    for entry in &mut bib.entries {
        for (_, v) in &mut entry.fields {
            *v = clean(v);
        }
    }
    Ok(bib)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BibReport {
    pub papers: usize,
    pub writes_edges: usize,
    pub warnings: Vec<String>,
}

fn same_person(author: &str, owner: &str) -> bool {
    let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    let owner = norm(owner);
    if norm(author) == owner {
        return true;
    }
    // "Last, First" form
    match author.split_once(',') {
        Some((last, first)) => norm(&format!("{first} {last}")) == owner,
        None => false,
    }
}

/// Adds the supported entries of a bibliography as `Paper` nodes keyed by
/// citation key, with a `writes` edge from the owner for entries the owner
/// authored.
pub fn import_bibliography(graph: &mut Graph, bib: &Bibliography, owner_name: &str) -> Result<BibReport> {
    let mut report = BibReport {
        warnings: bib.warnings.clone(),
        ..BibReport::default()
    };
    let owner = graph.owner();
    for entry in &bib.entries {
        if !SUPPORTED_TYPES.contains(&entry.entry_type.as_str()) {
            report.warnings.push(format!(
                "line {}: unsupported entry type @{} ({}) skipped",
                entry.line, entry.entry_type, entry.key
            ));
            continue;
        }
        let ignored: Vec<&str> = entry
            .fields
            .iter()
            .map(|(n, _)| n.as_str())
            .filter(|n| !USED_FIELDS.contains(n))
            .collect();
        if !ignored.is_empty() {
            report
                .warnings
                .push(format!("{}: ignored field(s) {}", entry.key, ignored.join(", ")));
        }
        let mut updates = std::collections::BTreeMap::new();
        if let Some(title) = entry.field("title") {
            updates.insert("title".to_string(), PropertyUpdate::Set(PropertyValue::text(title)));
        }
        if let Some(year) = entry.field("year") {
            let value = year
                .parse::<i64>()
                .map(PropertyValue::Integer)
                .unwrap_or_else(|_| PropertyValue::text(year));
            updates.insert("year".to_string(), PropertyUpdate::Set(value));
        }
        let paper = match graph.find_by_name("Paper", &entry.key) {
            Some(n) => n.id,
            None => {
                let props = Properties::from([("name".to_string(), PropertyValue::text(entry.key.clone()))]);
                graph.add_node(["Paper"], props)?
            }
        };
        graph.set_properties(ElementId::Node(paper), &updates)?;
        report.papers += 1;

        if entry.authors().iter().any(|a| same_person(a, owner_name))
            && graph
                .find_duplicate(owner, paper, "writes", &TemporalInterval::UNBOUNDED)
                .is_none()
        {
            graph.add_relationship(owner, paper, "writes", TemporalInterval::UNBOUNDED, Properties::new())?;
            report.writes_edges += 1;
        }
    }
    Ok(report)
}

pub fn import_bibtex(graph: &mut Graph, path: &Path, owner_name: &str) -> Result<BibReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bib = parse_bibtex(&text)?;
    import_bibliography(graph, &bib, owner_name)
}

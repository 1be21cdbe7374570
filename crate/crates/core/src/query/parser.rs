//! Tokenizer and recursive-descent parser for the pattern query language.
//!
//! ```text
//! query    := "MATCH" path ("AT" pdate)? ("AS" ident)? "RETURN" items
//! path     := npat (epat npat)*
//! npat     := "(" ident? (":" ident)? props? ")"
//! epat     := "-[" ident? (":" ident)? props? "]->"
//!           | "<-[" ident? (":" ident)? props? "]-"
//! props    := "{" ident ":" literal ("," ident ":" literal)* "}"
//! items    := item ("," item)*
//! item     := ident | ident "." ident
//! literal  := quoted-string | integer | "true" | "false"
//! pdate    := YYYY | YYYY "-" MM | YYYY "-" MM "-" DD
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::{EdgeDirection, EdgePattern, Literal, NodePattern, Query, ReturnItem};
use crate::error::Error;
use crate::temporal::PartialDate;

const KEYWORDS: [&str; 4] = ["MATCH", "AT", "AS", "RETURN"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Semantic,
}

/// A parse failure with its 1-based position and, for syntax errors, the
/// tokens that would have been accepted there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryError {
    pub kind: ErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: BTreeSet<String>,
}

impl fmt::Display for QueryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            let list: Vec<&str> = self.expected.iter().map(String::as_str).collect();
            write!(f, " (expected one of {})", list.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for QueryError {}

impl From<QueryError> for Error {
    fn from(e: QueryError) -> Self {
        let mut message = e.message.clone();
        if !e.expected.is_empty() {
            let list: Vec<&str> = e.expected.iter().map(String::as_str).collect();
            message.push_str(&format!("; expected one of {}", list.join(", ")));
        }
        Error::Parse {
            line: e.line,
            column: e.column,
            message,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Dot,
    OutOpen,
    OutClose,
    InOpen,
    InClose,
    Str(String),
    Number(String),
    Ident(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::OutOpen => "`-[`".into(),
            Tok::OutClose => "`]->`".into(),
            Tok::InOpen => "`<-[`".into(),
            Tok::InClose => "`]-`".into(),
            Tok::Str(_) => "string".into(),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => format!("`{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, QueryError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| QueryError {
        kind: ErrorKind::Syntax,
        line,
        column,
        message,
        expected: BTreeSet::new(),
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let at = |k: usize| chars.get(i + k).copied();
        let (consumed, tok) = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => (1, None),
            '(' => (1, Some(Tok::LParen)),
            ')' => (1, Some(Tok::RParen)),
            '{' => (1, Some(Tok::LBrace)),
            '}' => (1, Some(Tok::RBrace)),
            ':' => (1, Some(Tok::Colon)),
            ',' => (1, Some(Tok::Comma)),
            '.' => (1, Some(Tok::Dot)),
            ']' if at(1) == Some('-') && at(2) == Some('>') => (3, Some(Tok::OutClose)),
            ']' if at(1) == Some('-') => (2, Some(Tok::InClose)),
            '-' if at(1) == Some('[') => (2, Some(Tok::OutOpen)),
            '<' if at(1) == Some('-') && at(2) == Some('[') => (3, Some(Tok::InOpen)),
            '"' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None | Some('\n') => {
                            return Err(err(start_line, start_col, "unterminated string".into()))
                        }
                        Some('"') => break,
                        Some('\\') => {
                            let esc = match chars.get(j + 1) {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                Some('r') => '\r',
                                Some('t') => '\t',
                                other => {
                                    return Err(err(
                                        start_line,
                                        start_col + (j - i),
                                        format!("invalid escape {:?}", other.map(|c| format!("\\{c}")).unwrap_or_default()),
                                    ))
                                }
                            };
                            s.push(esc);
                            j += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                (j + 1 - i, Some(Tok::Str(s)))
            }
            c if c.is_ascii_digit() || (c == '-' && at(1).is_some_and(|d| d.is_ascii_digit())) => {
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        Some(d) if d.is_ascii_digit() => j += 1,
                        Some('-') if chars.get(j + 1).is_some_and(char::is_ascii_digit) => j += 1,
                        _ => break,
                    }
                }
                let text: String = chars[i..j].iter().collect();
                (j - i, Some(Tok::Number(text)))
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while chars.get(j).is_some_and(|d| d.is_ascii_alphanumeric() || *d == '_') {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                (j - i, Some(Tok::Ident(text)))
            }
            other => {
                return Err(err(start_line, start_col, format!("unexpected character {other:?}")));
            }
        };
        if let Some(tok) = tok {
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            });
        }
        i += consumed;
        col += consumed;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, QueryError>;

/// Variable, label or type, and property constraints of one pattern.
type PatternBody = (Option<String>, Option<String>, Vec<(String, Literal)>);

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str], note: Option<String>) -> QueryError {
        let t = self.peek();
        let mut message = format!("unexpected {}", t.tok.describe());
        if let Some(note) = note {
            message.push_str("; ");
            message.push_str(&note);
        }
        QueryError {
            kind: ErrorKind::Syntax,
            line: t.line,
            column: t.column,
            message,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{kw}`")], None))
        }
    }

    /// A non-keyword identifier at the current position, if any.
    fn opt_ident(&mut self) -> Option<String> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Some(s)
            }
            _ => None,
        }
    }

    fn ident(&mut self, expected: &[&str]) -> PResult<String> {
        self.opt_ident().ok_or_else(|| self.unexpected(expected, None))
    }

    fn literal(&mut self) -> PResult<Literal> {
        let expected = ["string", "integer", "`true`", "`false`"];
        let lit = match &self.peek().tok {
            Tok::Str(s) => Literal::Str(s.clone()),
            Tok::Number(n) => match n.parse::<i64>() {
                Ok(i) => Literal::Int(i),
                Err(_) => return Err(self.unexpected(&expected, Some(format!("`{n}` is not an integer")))),
            },
            Tok::Ident(s) if s == "true" => Literal::Bool(true),
            Tok::Ident(s) if s == "false" => Literal::Bool(false),
            _ => return Err(self.unexpected(&expected, None)),
        };
        self.bump();
        Ok(lit)
    }

    fn props(&mut self) -> PResult<Vec<(String, Literal)>> {
        let mut props = Vec::new();
        if !self.eat(&Tok::LBrace) {
            return Ok(props);
        }
        loop {
            let key = self.ident(&["identifier"])?;
            if !self.eat(&Tok::Colon) {
                return Err(self.unexpected(&["`:`"], None));
            }
            props.push((key, self.literal()?));
            if self.eat(&Tok::Comma) {
                continue;
            }
            if self.eat(&Tok::RBrace) {
                return Ok(props);
            }
            return Err(self.unexpected(&["`,`", "`}`"], None));
        }
    }

    /// `ident? (":" ident)? props?` shared by node and edge patterns.
    fn pattern_body(&mut self) -> PResult<PatternBody> {
        let var = self.opt_ident();
        let label = if self.eat(&Tok::Colon) {
            Some(self.ident(&["identifier"])?)
        } else {
            None
        };
        let props = self.props()?;
        Ok((var, label, props))
    }

    fn node_pattern(&mut self) -> PResult<NodePattern> {
        let open = self.peek().clone();
        if !self.eat(&Tok::LParen) {
            return Err(self.unexpected(&["`(`"], None));
        }
        let var_before = self.pos;
        let (var, label, props) = self.pattern_body()?;
        if !self.eat(&Tok::RParen) {
            let mut expected = vec!["`)`"];
            if props.is_empty() {
                expected.push("`{`");
                if label.is_none() {
                    expected.push("`:`");
                    if self.pos == var_before {
                        expected.push("identifier");
                    }
                }
            }
            let note = format!("unclosed `(` opened at {}:{}", open.line, open.column);
            return Err(self.unexpected(&expected, Some(note)));
        }
        Ok(NodePattern { var, label, props })
    }

    fn edge_pattern(&mut self) -> PResult<Option<EdgePattern>> {
        let (direction, close) = match self.peek().tok {
            Tok::OutOpen => (EdgeDirection::Outgoing, Tok::OutClose),
            Tok::InOpen => (EdgeDirection::Incoming, Tok::InClose),
            _ => return Ok(None),
        };
        let open = self.bump();
        let var_before = self.pos;
        let (var, rel_type, props) = self.pattern_body()?;
        if !self.eat(&close) {
            let close_name = match close {
                Tok::OutClose => "`]->`",
                _ => "`]-`",
            };
            let mut expected = vec![close_name];
            if props.is_empty() {
                expected.push("`{`");
                if rel_type.is_none() {
                    expected.push("`:`");
                    if self.pos == var_before {
                        expected.push("identifier");
                    }
                }
            }
            let note = format!("unclosed edge opened at {}:{}", open.line, open.column);
            return Err(self.unexpected(&expected, Some(note)));
        }
        Ok(Some(EdgePattern {
            var,
            rel_type,
            direction,
            props,
        }))
    }

    fn date(&mut self) -> PResult<PartialDate> {
        match &self.peek().tok {
            Tok::Number(n) => match n.parse::<PartialDate>() {
                Ok(d) => {
                    self.bump();
                    Ok(d)
                }
                Err(e) => Err(self.unexpected(&["date"], Some(e.to_string()))),
            },
            _ => Err(self.unexpected(&["date"], None)),
        }
    }

    fn return_item(&mut self) -> PResult<(ReturnItem, (usize, usize))> {
        let pos = (self.peek().line, self.peek().column);
        let var = self.ident(&["identifier"])?;
        let key = if self.eat(&Tok::Dot) {
            Some(self.ident(&["identifier"])?)
        } else {
            None
        };
        Ok((ReturnItem { var, key }, pos))
    }

    fn query(&mut self) -> PResult<(Query, Vec<(usize, usize)>)> {
        self.keyword("MATCH")?;
        let start = self.node_pattern()?;
        let mut hops = Vec::new();
        while let Some(edge) = self.edge_pattern()? {
            hops.push((edge, self.node_pattern()?));
        }
        let at = if self.is_keyword("AT") {
            self.bump();
            Some(self.date()?)
        } else {
            None
        };
        let as_role = if self.is_keyword("AS") {
            self.bump();
            Some(self.ident(&["identifier"])?)
        } else {
            None
        };
        if !self.is_keyword("RETURN") {
            let mut expected = vec!["`RETURN`"];
            if as_role.is_none() {
                expected.push("`AS`");
                if at.is_none() {
                    expected.push("`AT`");
                    expected.extend(["`-[`", "`<-[`"]);
                }
            }
            return Err(self.unexpected(&expected, None));
        }
        self.bump();
        let mut returns = Vec::new();
        let mut positions = Vec::new();
        loop {
            let (item, pos) = self.return_item()?;
            returns.push(item);
            positions.push(pos);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        if self.peek().tok != Tok::Eof {
            return Err(self.unexpected(&["`,`", "end of input"], None));
        }
        Ok((
            Query {
                start,
                hops,
                at,
                as_role,
                returns,
            },
            positions,
        ))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum VarKind {
    Node,
    Edge,
}

fn check_variables(query: &Query, positions: &[(usize, usize)]) -> Result<(), QueryError> {
    let semantic = |(line, column): (usize, usize), message: String| QueryError {
        kind: ErrorKind::Semantic,
        line,
        column,
        message,
        expected: BTreeSet::new(),
    };
    let mut kinds: BTreeMap<&str, VarKind> = BTreeMap::new();
    let nodes = query.node_patterns().filter_map(|n| n.var.as_deref()).map(|v| (v, VarKind::Node));
    let edges = query.edge_patterns().filter_map(|e| e.var.as_deref()).map(|v| (v, VarKind::Edge));
    for (var, kind) in nodes.chain(edges) {
        if *kinds.entry(var).or_insert(kind) != kind {
            return Err(semantic(
                (1, 1),
                format!("variable `{var}` is bound to both a node and a relationship"),
            ));
        }
    }
    for (item, pos) in query.returns.iter().zip(positions) {
        if !kinds.contains_key(item.var.as_str()) {
            return Err(semantic(*pos, format!("variable `{}` is not bound in the pattern", item.var)));
        }
    }
    Ok(())
}

/// Parses query text into a [`Query`].
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let (query, positions) = parser.query()?;
    check_variables(&query, &positions)?;
    Ok(query)
}

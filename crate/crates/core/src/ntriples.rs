//! Line-oriented N-Triples reader.
//!
//! Blank nodes are rejected: the learner needs a fixed universe of named
//! individuals. Literals are kept byte-for-byte as written, including the
//! language tag or datatype suffix.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::iri::Iri;

/// Object position of a triple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Iri),
    /// Verbatim source text, e.g. `"5"^^<http://www.w3.org/2001/XMLSchema#integer>`.
    Literal(String),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Literal(text) => f.write_str(text),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: Term) -> Self {
        Self {
            subject,
            predicate,
            object,
        }
    }
}

/// Serializes as one N-Triples statement (without trailing newline).
impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{}> <{}> {} .",
            self.subject, self.predicate, self.object
        )
    }
}

/// Parses an N-Triples document into triples in document order.
pub fn parse_ntriples(text: &str) -> Result<Vec<Triple>> {
    let head = text.trim_start();
    if head.starts_with("<?xml") || head.contains("<rdf:RDF") || head.starts_with("<Ontology") {
        return Err(Error::UnsupportedFormat(
            "RDF/XML and OWL/XML are not supported; convert the ontology to N-Triples".into(),
        ));
    }
    let mut triples = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let mut cursor = Cursor {
            line: index + 1,
            text: line,
            pos: 0,
        };
        cursor.skip_ws();
        if cursor.at_end() || cursor.peek() == Some('#') {
            continue;
        }
        let subject = cursor.subject()?;
        cursor.skip_ws();
        let predicate = cursor.iri()?;
        cursor.skip_ws();
        let object = cursor.object()?;
        cursor.skip_ws();
        cursor.expect('.')?;
        cursor.skip_ws();
        if !cursor.at_end() && cursor.peek() != Some('#') {
            return Err(cursor.error("unexpected content after '.'"));
        }
        triples.push(Triple::new(subject, predicate, object));
    }
    Ok(triples)
}

/// Reads an ontology file. Only N-Triples is accepted; XML serializations
/// are refused with [`Error::UnsupportedFormat`].
pub fn read_ntriples_file(path: &Path) -> Result<Vec<Triple>> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    if let Some("owl" | "rdf" | "xml" | "owx") = ext.as_deref() {
        return Err(Error::UnsupportedFormat(format!(
            "{}: only N-Triples (.nt) ontologies are supported",
            path.display()
        )));
    }
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_ntriples(&text)
}

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::NTriples {
            line: self.line,
            column: self.text[..self.pos].chars().count() + 1,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error(format!("expected {c:?}")))
        }
    }

    fn subject(&mut self) -> Result<Iri> {
        if self.rest().starts_with("_:") {
            return Err(self.error("blank nodes are not supported"));
        }
        self.iri()
    }

    fn iri(&mut self) -> Result<Iri> {
        if self.peek() != Some('<') {
            if self.rest().starts_with("_:") {
                return Err(self.error("blank nodes are not supported"));
            }
            return Err(self.error("expected '<' starting an IRI"));
        }
        self.pos += 1;
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => break,
                Some('\\') => value.push(self.unicode_escape()?),
                Some(c)
                    if c.is_whitespace()
                        || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') =>
                {
                    return Err(self.error(format!("illegal character {c:?} in IRI")));
                }
                Some(c) => value.push(c),
            }
        }
        Iri::new(value).map_err(|e| self.error(e.to_string()))
    }

    fn unicode_escape(&mut self) -> Result<char> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid escape in IRI")),
        };
        let start = self.pos;
        for _ in 0..width {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => {}
                _ => return Err(self.error("invalid hex escape")),
            }
        }
        u32::from_str_radix(&self.text[start..self.pos], 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.error("escape is not a valid code point"))
    }

    fn object(&mut self) -> Result<Term> {
        match self.peek() {
            Some('<') => self.iri().map(Term::Iri),
            Some('"') => self.literal().map(Term::Literal),
            Some('_') if self.rest().starts_with("_:") => {
                Err(self.error("blank nodes are not supported"))
            }
            _ => Err(self.error("expected IRI or literal object")),
        }
    }

    fn literal(&mut self) -> Result<String> {
        let start = self.pos;
        self.pos += 1;
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated string literal")),
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('t' | 'b' | 'n' | 'r' | 'f' | '"' | '\'' | '\\') => {}
                    Some('u') => self.skip_hex(4)?,
                    Some('U') => self.skip_hex(8)?,
                    _ => return Err(self.error("invalid escape in literal")),
                },
                Some(_) => {}
            }
        }
        if self.peek() == Some('@') {
            self.pos += 1;
            let tag_start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                self.pos += 1;
            }
            if self.pos == tag_start {
                return Err(self.error("empty language tag"));
            }
        } else if self.rest().starts_with("^^") {
            self.pos += 2;
            if self.peek() == Some('<') {
                self.iri()?;
            } else {
                // Lenient: accept a prefixed datatype such as xsd:integer.
                let dt_start = self.pos;
                while matches!(self.peek(), Some(c) if !c.is_whitespace()) {
                    self.pos += 1;
                }
                if self.text[dt_start..self.pos].ends_with('.') {
                    self.pos -= 1;
                }
                if self.pos == dt_start {
                    return Err(self.error("missing datatype after ^^"));
                }
            }
        }
        Ok(self.text[start..self.pos].to_owned())
    }

    fn skip_hex(&mut self, width: usize) -> Result<()> {
        for _ in 0..width {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => {}
                _ => return Err(self.error("invalid hex escape")),
            }
        }
        Ok(())
    }
}

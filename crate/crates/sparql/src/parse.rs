//! Parser for the query fragment in [`crate::algebra`], so that a local
//! store can answer queries received over HTTP.

use conceptlearn_core::iri::{self, Iri};

use crate::algebra::{
    CountAtLeast, Element, Filter, Group, Query, Select, TermPattern, TriplePattern,
};
use crate::error::SparqlError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Punct(char),
    GreaterEq,
    Var(String),
    IriRef(String),
    PName(String, String),
    Word(String),
    Int(u32),
}

fn err(position: usize, message: impl Into<String>) -> SparqlError {
    SparqlError::Parse {
        position,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, SparqlError> {
    let bytes: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            while i < bytes.len() && bytes[i] != '\n' {
                i += 1;
            }
        } else if "{}().".contains(c) {
            out.push((start, Tok::Punct(c)));
            i += 1;
        } else if c == '>' && bytes.get(i + 1) == Some(&'=') {
            out.push((start, Tok::GreaterEq));
            i += 2;
        } else if c == '<' {
            let end = bytes[i..]
                .iter()
                .position(|&d| d == '>')
                .ok_or_else(|| err(start, "unterminated IRI"))?;
            out.push((start, Tok::IriRef(bytes[i + 1..i + end].iter().collect())));
            i += end + 1;
        } else if c == '?' || c == '$' {
            i += 1;
            let s = i;
            while i < bytes.len() && (bytes[i].is_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            if s == i {
                return Err(err(start, "empty variable name"));
            }
            out.push((start, Tok::Var(bytes[s..i].iter().collect())));
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: String = bytes[start..i].iter().collect();
            out.push((
                start,
                Tok::Int(n.parse().map_err(|_| err(start, "integer too large"))?),
            ));
        } else if c.is_alphabetic() || c == ':' {
            while i < bytes.len() && (bytes[i].is_alphanumeric() || "_-:".contains(bytes[i])) {
                i += 1;
            }
            let word: String = bytes[start..i].iter().collect();
            match word.split_once(':') {
                Some((p, l)) => out.push((start, Tok::PName(p.into(), l.into()))),
                None => out.push((start, Tok::Word(word))),
            }
        } else {
            return Err(err(start, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    prefixes: Vec<(String, String)>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn next(&mut self) -> Result<Tok, SparqlError> {
        let t = self
            .toks
            .get(self.pos)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| err(self.end, "unexpected end of query"))?;
        self.pos += 1;
        Ok(t)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x.eq_ignore_ascii_case(w))
    }

    fn expect_word(&mut self, w: &str) -> Result<(), SparqlError> {
        if self.is_word(w) {
            self.pos += 1;
            Ok(())
        } else {
            Err(err(self.offset(), format!("expected {w}")))
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), SparqlError> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(err(self.offset(), format!("expected '{c}'")))
        }
    }

    fn var(&mut self) -> Result<String, SparqlError> {
        let at = self.offset();
        match self.next()? {
            Tok::Var(v) => Ok(v),
            _ => Err(err(at, "expected a variable")),
        }
    }

    fn iri(&mut self) -> Result<Iri, SparqlError> {
        let at = self.offset();
        let text = match self.next()? {
            Tok::IriRef(s) => s,
            Tok::PName(p, l) => {
                let ns = self
                    .prefixes
                    .iter()
                    .find(|(q, _)| *q == p)
                    .map(|(_, ns)| ns.clone())
                    .ok_or_else(|| err(at, format!("undeclared prefix {p}:")))?;
                format!("{ns}{l}")
            }
            Tok::Word(w) if w == "a" => iri::RDF_TYPE.to_string(),
            _ => return Err(err(at, "expected an IRI")),
        };
        Iri::new(text).map_err(|e| err(at, e.to_string()))
    }

    fn term(&mut self) -> Result<TermPattern, SparqlError> {
        if matches!(self.peek(), Some(Tok::Var(_))) {
            Ok(TermPattern::Var(self.var()?))
        } else {
            Ok(TermPattern::Iri(self.iri()?))
        }
    }

    fn query(&mut self) -> Result<Query, SparqlError> {
        while self.is_word("PREFIX") {
            self.pos += 1;
            let at = self.offset();
            let Tok::PName(p, l) = self.next()? else {
                return Err(err(at, "expected a prefix name"));
            };
            if !l.is_empty() {
                return Err(err(at, "prefix name must end with ':'"));
            }
            let at = self.offset();
            let Tok::IriRef(ns) = self.next()? else {
                return Err(err(at, "expected a namespace IRI"));
            };
            self.prefixes.push((p, ns));
        }
        let select = self.select()?;
        if self.pos != self.toks.len() {
            return Err(err(self.offset(), "trailing input"));
        }
        Ok(Query {
            prefixes: self.prefixes.clone(),
            select,
        })
    }

    fn select(&mut self) -> Result<Select, SparqlError> {
        self.expect_word("SELECT")?;
        let distinct = self.is_word("DISTINCT");
        if distinct {
            self.pos += 1;
        }
        let mut projection = Vec::new();
        while matches!(self.peek(), Some(Tok::Var(_))) {
            projection.push(self.var()?);
        }
        if projection.is_empty() {
            return Err(err(self.offset(), "expected projected variables"));
        }
        self.expect_word("WHERE")?;
        let pattern = self.group()?;
        let mut group_by = Vec::new();
        if self.is_word("GROUP") {
            self.pos += 1;
            self.expect_word("BY")?;
            while matches!(self.peek(), Some(Tok::Var(_))) {
                group_by.push(self.var()?);
            }
        }
        let having = if self.is_word("HAVING") {
            self.pos += 1;
            self.expect_punct('(')?;
            self.expect_word("COUNT")?;
            self.expect_punct('(')?;
            self.expect_word("DISTINCT")?;
            let var = self.var()?;
            self.expect_punct(')')?;
            let at = self.offset();
            if self.next()? != Tok::GreaterEq {
                return Err(err(at, "expected '>='"));
            }
            let at = self.offset();
            let Tok::Int(min) = self.next()? else {
                return Err(err(at, "expected an integer"));
            };
            self.expect_punct(')')?;
            Some(CountAtLeast { var, min })
        } else {
            None
        };
        Ok(Select {
            distinct,
            projection,
            pattern,
            group_by,
            having,
        })
    }

    fn group(&mut self) -> Result<Group, SparqlError> {
        self.expect_punct('{')?;
        let mut elements = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Punct('}')) => {
                    self.pos += 1;
                    return Ok(Group(elements));
                }
                Some(Tok::Punct('.')) => self.pos += 1,
                Some(Tok::Punct('{')) => {
                    if matches!(self.toks.get(self.pos + 1), Some((_, Tok::Word(w))) if w.eq_ignore_ascii_case("SELECT"))
                    {
                        self.pos += 1;
                        let s = self.select()?;
                        self.expect_punct('}')?;
                        elements.push(Element::SubSelect(Box::new(s)));
                        continue;
                    }
                    let mut branches = vec![self.group()?];
                    while self.is_word("UNION") {
                        self.pos += 1;
                        branches.push(self.group()?);
                    }
                    elements.push(if branches.len() == 1 {
                        Element::Group(branches.pop().expect("one"))
                    } else {
                        Element::Union(branches)
                    });
                }
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("FILTER") => {
                    self.pos += 1;
                    if self.peek() == Some(&Tok::Punct('(')) {
                        self.pos += 1;
                        self.expect_word("false")?;
                        self.expect_punct(')')?;
                        elements.push(Element::Filter(Filter::False));
                    } else {
                        self.expect_word("NOT")?;
                        self.expect_word("EXISTS")?;
                        elements.push(Element::Filter(Filter::NotExists(self.group()?)));
                    }
                }
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("MINUS") => {
                    self.pos += 1;
                    elements.push(Element::Minus(self.group()?));
                }
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("VALUES") => {
                    self.pos += 1;
                    let var = self.var()?;
                    self.expect_punct('{')?;
                    let mut values = Vec::new();
                    while self.peek() != Some(&Tok::Punct('}')) {
                        values.push(self.iri()?);
                    }
                    self.pos += 1;
                    elements.push(Element::Values { var, values });
                }
                None => return Err(err(self.end, "unterminated group")),
                _ => {
                    let subject = self.term()?;
                    let predicate = self.term()?;
                    let object = self.term()?;
                    elements.push(Element::Triple(TriplePattern {
                        subject,
                        predicate,
                        object,
                    }));
                    match self.peek() {
                        Some(Tok::Punct('.')) => self.pos += 1,
                        Some(Tok::Punct('}')) => {}
                        _ => return Err(err(self.offset(), "expected '.' after triple pattern")),
                    }
                }
            }
        }
    }
}

/// Parses a query in the fragment the compiler emits.
pub fn parse_query(text: &str) -> Result<Query, SparqlError> {
    let toks = tokenize(text)?;
    Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        prefixes: Vec::new(),
    }
    .query()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_prefixed_and_keyword_forms() {
        let q = parse_query(
            "PREFIX ex: <http://e/>\nselect distinct ?x where { ?x a ex:A . { ?x ex:r ?y } UNION { ?x ex:s ?y } FILTER NOT EXISTS { ?x a ex:B } }",
        )
        .unwrap();
        assert!(q.select.distinct);
        assert_eq!(q.select.pattern.0.len(), 3);
        assert!(matches!(q.select.pattern.0[1], Element::Union(ref b) if b.len() == 2));
    }

    #[test]
    fn errors_have_positions() {
        match parse_query("SELECT ?x WHERE { ?x ex:p ?y }") {
            Err(SparqlError::Parse { position, message }) => {
                assert_eq!(position, 21);
                assert!(message.contains("ex:"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_query("SELECT WHERE { }").is_err());
        assert!(parse_query("SELECT ?x WHERE { ?x <a> ?y ").is_err());
    }
}

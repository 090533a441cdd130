//! Manchester-syntax reader for class expressions.
//!
//! Precedence, tightest first: `not`, then `some`/`only`/`min`, then `and`,
//! then `or`. Names resolve through a [`SymbolTable`] either by local name
//! or as a bracketed full IRI.

use crate::error::{Error, Result};
use crate::expr::ClassExpression as CE;
use crate::iri::Iri;
use crate::kb::SymbolTable;
use crate::render::is_identifier_char;

/// Parses and normalizes a Manchester class expression.
pub fn parse_expression(text: &str, symbols: &SymbolTable) -> Result<CE> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        symbols,
        end: text.len(),
    };
    let expr = parser.disjunction()?;
    if let Some(tok) = parser.tokens.get(parser.pos) {
        return Err(Error::Parse {
            position: tok.offset,
            message: format!("unexpected {}", tok.kind.describe()),
        });
    }
    Ok(expr.normalize())
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Open,
    Close,
    Word(String),
    Bracketed(String),
    Int(u32),
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Open => "'('".into(),
            Kind::Close => "')'".into(),
            Kind::Word(w) => format!("{w:?}"),
            Kind::Bracketed(i) => format!("<{i}>"),
            Kind::Int(n) => format!("number {n}"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Kind,
    offset: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '(' || c == ')' {
            chars.next();
            let kind = if c == '(' { Kind::Open } else { Kind::Close };
            tokens.push(Token { kind, offset });
        } else if c == '<' {
            chars.next();
            let mut iri = String::new();
            loop {
                match chars.next() {
                    Some((_, '>')) => break,
                    Some((_, ch)) => iri.push(ch),
                    None => {
                        return Err(Error::Parse {
                            position: offset,
                            message: "unterminated <IRI>".into(),
                        })
                    }
                }
            }
            tokens.push(Token {
                kind: Kind::Bracketed(iri),
                offset,
            });
        } else if is_identifier_char(c) || c == ':' || c == '#' || c == '/' {
            let mut word = String::new();
            while let Some(&(_, ch)) = chars.peek() {
                if is_identifier_char(ch) || matches!(ch, ':' | '#' | '/') {
                    word.push(ch);
                    chars.next();
                } else {
                    break;
                }
            }
            let kind = if word.chars().all(|ch| ch.is_ascii_digit()) {
                Kind::Int(word.parse().map_err(|_| Error::Parse {
                    position: offset,
                    message: format!("number {word} out of range"),
                })?)
            } else {
                Kind::Word(word)
            };
            tokens.push(Token { kind, offset });
        } else {
            return Err(Error::Parse {
                position: offset,
                message: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    symbols: &'a SymbolTable,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Kind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_word(&self, offset: usize) -> Option<&str> {
        match self.tokens.get(self.pos + offset).map(|t| &t.kind) {
            Some(Kind::Word(w)) => Some(w),
            _ => None,
        }
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.offset)
            .unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.offset(),
            message: message.into(),
        }
    }

    fn disjunction(&mut self) -> Result<CE> {
        let mut operands = vec![self.conjunction()?];
        while self.peek_word(0) == Some("or") {
            self.pos += 1;
            operands.push(self.conjunction()?);
        }
        Ok(if operands.len() == 1 {
            operands.pop().expect("one operand")
        } else {
            CE::Or(operands)
        })
    }

    fn conjunction(&mut self) -> Result<CE> {
        let mut operands = vec![self.unary()?];
        while self.peek_word(0) == Some("and") {
            self.pos += 1;
            operands.push(self.unary()?);
        }
        Ok(if operands.len() == 1 {
            operands.pop().expect("one operand")
        } else {
            CE::And(operands)
        })
    }

    fn unary(&mut self) -> Result<CE> {
        if self.peek_word(0) == Some("not") {
            self.pos += 1;
            return Ok(CE::not(self.unary()?));
        }
        if matches!(self.peek_word(1), Some("some" | "only" | "min")) {
            return self.restriction();
        }
        self.primary()
    }

    fn restriction(&mut self) -> Result<CE> {
        let role = self.name(true)?;
        let keyword = self.peek_word(0).expect("checked by caller").to_owned();
        self.pos += 1;
        match keyword.as_str() {
            "some" => Ok(CE::some(role, self.unary()?)),
            "only" => Ok(CE::only(role, self.unary()?)),
            _ => {
                let n = match self.peek() {
                    Some(Kind::Int(n)) if *n >= 1 => *n,
                    _ => return Err(self.error("expected a positive integer after 'min'")),
                };
                self.pos += 1;
                Ok(CE::min(n, role, self.unary()?))
            }
        }
    }

    fn primary(&mut self) -> Result<CE> {
        match self.peek() {
            Some(Kind::Open) => {
                self.pos += 1;
                let inner = self.disjunction()?;
                if self.peek() != Some(&Kind::Close) {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Kind::Word(w)) if w == "Thing" => {
                self.pos += 1;
                Ok(CE::Top)
            }
            Some(Kind::Word(w)) if w == "Nothing" => {
                self.pos += 1;
                Ok(CE::Bottom)
            }
            Some(Kind::Word(_) | Kind::Bracketed(_)) => Ok(CE::Named(self.name(false)?)),
            Some(other) => {
                let d = other.describe();
                Err(self.error(format!("expected a class expression, found {d}")))
            }
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn name(&mut self, role: bool) -> Result<Iri> {
        let symbol = match self.peek() {
            Some(Kind::Word(w)) => {
                if crate::render::KEYWORDS.contains(&w.as_str()) {
                    return Err(self.error(format!("unexpected keyword {w:?}")));
                }
                w.clone()
            }
            Some(Kind::Bracketed(iri)) => iri.clone(),
            _ => return Err(self.error("expected a name")),
        };
        self.pos += 1;
        if role {
            self.symbols.resolve_role(&symbol)
        } else {
            self.symbols.resolve_class(&symbol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::KnowledgeBase;
    use crate::ntriples::parse_ntriples;

    fn symbols() -> (KnowledgeBase, SymbolTable) {
        let kb = KnowledgeBase::from_triples(&parse_ntriples(crate::fixtures::FAMILY_NT).unwrap())
            .unwrap();
        let s = kb.symbols();
        (kb, s)
    }

    fn fam(local: &str) -> Iri {
        Iri::new(format!("{}{local}", crate::fixtures::FAMILY_NS)).unwrap()
    }

    #[test]
    fn married_female() {
        let (_, s) = symbols();
        let e = parse_expression("Female and married some Thing", &s).unwrap();
        assert_eq!(
            e,
            CE::and([CE::Named(fam("Female")), CE::some(fam("married"), CE::Top)])
        );
    }

    #[test]
    fn thing() {
        let (_, s) = symbols();
        assert_eq!(parse_expression("Thing", &s).unwrap(), CE::Top);
    }

    #[test]
    fn negated_conjunction_normalizes() {
        let (_, s) = symbols();
        let e = parse_expression("not (Female and Male)", &s).unwrap();
        assert_eq!(
            e,
            CE::or([
                CE::not(CE::Named(fam("Female"))),
                CE::not(CE::Named(fam("Male")))
            ])
        );
    }

    #[test]
    fn precedence() {
        let (_, s) = symbols();
        let a = parse_expression("not Female and Male or Person", &s).unwrap();
        let b = parse_expression("((not Female) and Male) or Person", &s).unwrap();
        assert_eq!(a, b);
        let a = parse_expression("married some Female and Male", &s).unwrap();
        let b = parse_expression("(married some Female) and Male", &s).unwrap();
        assert_eq!(a, b);
        let e = parse_expression("married min 2 not Male", &s).unwrap();
        assert_eq!(
            e,
            CE::min(2, fam("married"), CE::not(CE::Named(fam("Male"))))
        );
    }

    #[test]
    fn full_iris() {
        let (_, s) = symbols();
        let text = format!("<{}> some <{}>", fam("married"), fam("Male"));
        assert_eq!(
            parse_expression(&text, &s).unwrap(),
            CE::some(fam("married"), CE::Named(fam("Male")))
        );
    }

    #[test]
    fn errors() {
        let (_, s) = symbols();
        assert!(matches!(
            parse_expression("Female and", &s),
            Err(Error::Parse { position: 10, .. })
        ));
        assert!(matches!(
            parse_expression("Female Male", &s),
            Err(Error::Parse { position: 7, .. })
        ));
        match parse_expression("Unicorn", &s) {
            Err(Error::UnknownClass(name)) => assert_eq!(name, "Unicorn"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_expression("Female some Thing", &s),
            Err(Error::UnknownRole(_))
        ));
        assert!(parse_expression("married min 0 Thing", &s).is_err());
        assert!(parse_expression("(Female", &s).is_err());
        assert!(parse_expression("Female & Male", &s).is_err());
    }
}

//! Text renderings of class expressions.
//!
//! Both syntaxes parenthesize every non-atomic operand of a connective,
//! quantifier or negation, so the output never depends on precedence.

use std::fmt::Write;

use crate::expr::ClassExpression as CE;
use crate::iri::Iri;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Syntax {
    /// `Female ⊓ (∃ married.⊤)`
    Dl,
    /// `Female and (married some Thing)`
    Manchester,
}

pub fn render(expr: &CE, syntax: Syntax) -> String {
    let mut out = String::new();
    match syntax {
        Syntax::Dl => dl(expr, &mut out),
        Syntax::Manchester => manchester(expr, &mut out),
    }
    out
}

pub(crate) const KEYWORDS: [&str; 8] = [
    "and", "or", "not", "some", "only", "min", "Thing", "Nothing",
];

/// The token used for an IRI in Manchester text: its local name when that
/// is a plain identifier, otherwise the bracketed full IRI.
pub fn manchester_name(iri: &Iri) -> String {
    let local = iri.local_name();
    if is_identifier(local) {
        local.to_owned()
    } else {
        format!("<{iri}>")
    }
}

pub(crate) fn is_identifier_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.')
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(is_identifier_char)
        && !s.chars().all(|c| c.is_ascii_digit())
        && !s.starts_with('.')
        && !s.ends_with('.')
        && !KEYWORDS.contains(&s)
}

/// Negated names count as atoms: `¬Male` needs no brackets.
fn is_atom(e: &CE) -> bool {
    match e {
        CE::Not(inner) => inner.is_atomic(),
        other => other.is_atomic(),
    }
}

fn dl_operand(e: &CE, out: &mut String) {
    if is_atom(e) {
        dl(e, out);
    } else {
        out.push('(');
        dl(e, out);
        out.push(')');
    }
}

fn dl(e: &CE, out: &mut String) {
    match e {
        CE::Named(iri) => out.push_str(iri.local_name()),
        CE::Top => out.push('⊤'),
        CE::Bottom => out.push('⊥'),
        CE::Not(inner) => {
            out.push('¬');
            dl_operand(inner, out);
        }
        CE::And(cs) | CE::Or(cs) => {
            let sep = if matches!(e, CE::And(_)) {
                " ⊓ "
            } else {
                " ⊔ "
            };
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                dl_operand(c, out);
            }
        }
        CE::Some { role, filler } | CE::Only { role, filler } => {
            out.push_str(if matches!(e, CE::Some { .. }) {
                "∃ "
            } else {
                "∀ "
            });
            out.push_str(role.local_name());
            out.push('.');
            dl_operand(filler, out);
        }
        CE::Min { n, role, filler } => {
            let _ = write!(out, "≥ {n} {}.", role.local_name());
            dl_operand(filler, out);
        }
    }
}

fn manchester_operand(e: &CE, out: &mut String) {
    if is_atom(e) {
        manchester(e, out);
    } else {
        out.push('(');
        manchester(e, out);
        out.push(')');
    }
}

fn manchester(e: &CE, out: &mut String) {
    match e {
        CE::Named(iri) => out.push_str(&manchester_name(iri)),
        CE::Top => out.push_str("Thing"),
        CE::Bottom => out.push_str("Nothing"),
        CE::Not(inner) => {
            out.push_str("not ");
            manchester_operand(inner, out);
        }
        CE::And(cs) | CE::Or(cs) => {
            let sep = if matches!(e, CE::And(_)) {
                " and "
            } else {
                " or "
            };
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                manchester_operand(c, out);
            }
        }
        CE::Some { role, filler } | CE::Only { role, filler } => {
            out.push_str(&manchester_name(role));
            out.push_str(if matches!(e, CE::Some { .. }) {
                " some "
            } else {
                " only "
            });
            manchester_operand(filler, out);
        }
        CE::Min { n, role, filler } => {
            let _ = write!(out, "{} min {n} ", manchester_name(role));
            manchester_operand(filler, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(name: &str) -> CE {
        CE::Named(Iri::new(format!("http://x#{name}")).unwrap())
    }

    fn married() -> Iri {
        Iri::new("http://x#married").unwrap()
    }

    #[test]
    fn married_female_in_dl() {
        let e = CE::and([c("Female"), CE::some(married(), CE::Top)]);
        assert_eq!(render(&e, Syntax::Dl), "Female ⊓ (∃ married.⊤)");
        assert_eq!(
            render(&e, Syntax::Manchester),
            "Female and (married some Thing)"
        );
    }

    #[test]
    fn atoms() {
        assert_eq!(render(&CE::Top, Syntax::Manchester), "Thing");
        assert_eq!(render(&CE::Bottom, Syntax::Manchester), "Nothing");
        assert_eq!(render(&CE::not(c("Male")), Syntax::Dl), "¬Male");
        assert_eq!(render(&CE::not(c("Male")), Syntax::Manchester), "not Male");
    }

    #[test]
    fn nested_parentheses() {
        let e = CE::or([
            CE::not(CE::min(2, married(), c("A"))),
            CE::only(married(), CE::and([c("A"), c("B")])),
        ]);
        assert_eq!(
            render(&e, Syntax::Dl),
            "(¬(≥ 2 married.A)) ⊔ (∀ married.(A ⊓ B))"
        );
        assert_eq!(
            render(&e, Syntax::Manchester),
            "(not (married min 2 A)) or (married only (A and B))"
        );
    }

    #[test]
    fn non_identifier_names_are_bracketed() {
        let odd = CE::Named(Iri::new("http://x/some").unwrap());
        assert_eq!(render(&odd, Syntax::Manchester), "<http://x/some>");
        let digits = CE::Named(Iri::new("http://x/123").unwrap());
        assert_eq!(render(&digits, Syntax::Manchester), "<http://x/123>");
    }
}

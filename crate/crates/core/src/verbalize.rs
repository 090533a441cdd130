//! Template-based English rendering of class expressions.

use std::collections::HashMap;

use crate::expr::ClassExpression as CE;
use crate::iri::{self, Iri};
use crate::kb::KnowledgeBase;
use crate::ntriples::Term;

/// Human labels for classes and roles. Lookups never fail: unknown IRIs
/// fall back to their split local name.
#[derive(Clone, Debug, Default)]
pub struct LabelMap {
    labels: HashMap<Iri, String>,
}

impl LabelMap {
    /// Labels from `rdfs:label` literals, local names elsewhere.
    pub fn from_kb(kb: &KnowledgeBase) -> Self {
        let mut labels = HashMap::new();
        for t in kb.literal_assertions() {
            if t.predicate.as_str() != iri::RDFS_LABEL {
                continue;
            }
            if let Term::Literal(lit) = &t.object {
                if let Some(text) = lexical_form(lit) {
                    labels
                        .entry(t.subject.clone())
                        .or_insert_with(|| text.to_lowercase());
                }
            }
        }
        Self { labels }
    }

    pub fn insert(&mut self, iri: Iri, label: impl Into<String>) {
        self.labels.insert(iri, label.into());
    }

    pub fn label(&self, iri: &Iri) -> String {
        self.labels
            .get(iri)
            .cloned()
            .unwrap_or_else(|| split_words(iri.local_name()))
    }
}

fn lexical_form(literal: &str) -> Option<&str> {
    let rest = literal.strip_prefix('"')?;
    Some(&rest[..rest.rfind('"')?])
}

/// `PersonWithASibling` → `person with a sibling`.
pub fn split_words(name: &str) -> String {
    let chars: Vec<char> = name.chars().collect();
    let mut out = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c == '-' {
            out.push(' ');
            continue;
        }
        if c.is_uppercase() && i > 0 {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower) {
                out.push(' ');
            }
        }
        out.extend(c.to_lowercase());
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Verb phrase for a role: `married` → `is married to`, `hasChild` →
/// `has child`, `knows` → `knows`, `love` → `loves`.
fn role_phrase(label: &str) -> String {
    if label.starts_with("has ") || label.starts_with("is ") || label == "has" || label == "is" {
        return label.to_string();
    }
    if label.ends_with("ed") && !label.contains(' ') {
        return format!("is {label} to");
    }
    let (first, rest) = label.split_once(' ').unwrap_or((label, ""));
    let verb = if first.ends_with('s') {
        first.to_string()
    } else {
        format!("{first}s")
    };
    if rest.is_empty() {
        verb
    } else {
        format!("{verb} {rest}")
    }
}

pub fn verbalize(expr: &CE, labels: &LabelMap) -> String {
    match expr {
        CE::Named(a) if a.as_str() == iri::OWL_THING => "anything".into(),
        CE::Named(a) if a.as_str() == iri::OWL_NOTHING => "nothing".into(),
        CE::Named(a) => format!("a {}", labels.label(a)),
        CE::Top => "anything".into(),
        CE::Bottom => "nothing".into(),
        CE::Not(c) => format!("anything that is not {}", verbalize(c, labels)),
        CE::Or(cs) => cs
            .iter()
            .map(|c| verbalize(c, labels))
            .collect::<Vec<_>>()
            .join(" or "),
        CE::Some { .. } | CE::Only { .. } | CE::Min { .. } => {
            format!("something that {}", clause(expr, labels))
        }
        CE::And(cs) => {
            let subject = cs.iter().position(|c| matches!(c, CE::Named(_)));
            let head = match subject {
                Some(i) => verbalize(&cs[i], labels),
                None => "something".into(),
            };
            let clauses: Vec<String> = cs
                .iter()
                .enumerate()
                .filter(|&(i, _)| Some(i) != subject)
                .map(|(_, c)| match c {
                    CE::Some { .. } | CE::Only { .. } | CE::Min { .. } => clause(c, labels),
                    other => format!("is also {}", verbalize(other, labels)),
                })
                .collect();
            if clauses.is_empty() {
                head
            } else {
                format!("{head} that {}", clauses.join(" and "))
            }
        }
    }
}

/// Relative clause for a restriction, without the leading "that".
fn clause(expr: &CE, labels: &LabelMap) -> String {
    match expr {
        CE::Some { role, filler } => {
            let phrase = role_phrase(&labels.label(role));
            if **filler == CE::Top {
                format!("{phrase} something")
            } else {
                format!("{phrase} {}", verbalize(filler, labels))
            }
        }
        CE::Only { role, filler } => format!(
            "{} only {}",
            role_phrase(&labels.label(role)),
            verbalize(filler, labels)
        ),
        CE::Min { n, role, filler } => {
            let object = verbalize(filler, labels);
            let object = object
                .strip_prefix("a ")
                .map(str::to_string)
                .unwrap_or(object);
            format!("{} at least {n} {object}", role_phrase(&labels.label(role)))
        }
        other => format!("is {}", verbalize(other, labels)),
    }
}

//! The SELECT-query fragment the compiler emits, with a serializer.

use std::fmt;

use conceptlearn_core::iri::{self, Iri};

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const OWL_NS: &str = "http://www.w3.org/2002/07/owl#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermPattern {
    Var(String),
    Iri(Iri),
}

impl TermPattern {
    pub fn var(name: impl Into<String>) -> Self {
        TermPattern::Var(name.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Filter {
    False,
    NotExists(Group),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Element {
    Triple(TriplePattern),
    Group(Group),
    Union(Vec<Group>),
    Filter(Filter),
    Minus(Group),
    Values { var: String, values: Vec<Iri> },
    SubSelect(Box<Select>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Group(pub Vec<Element>);

/// `HAVING (COUNT(DISTINCT ?var) >= min)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountAtLeast {
    pub var: String,
    pub min: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Select {
    pub distinct: bool,
    pub projection: Vec<String>,
    pub pattern: Group,
    pub group_by: Vec<String>,
    pub having: Option<CountAtLeast>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub prefixes: Vec<(String, String)>,
    pub select: Select,
}

impl Query {
    /// Wraps a SELECT with the rdf, rdfs and owl prefixes.
    pub fn with_standard_prefixes(select: Select) -> Self {
        Self {
            prefixes: vec![
                ("owl".into(), OWL_NS.into()),
                ("rdf".into(), RDF_NS.into()),
                ("rdfs".into(), RDFS_NS.into()),
            ],
            select,
        }
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &TermPattern) -> fmt::Result {
    match t {
        TermPattern::Var(v) => write!(f, "?{v}"),
        TermPattern::Iri(i) => write_iri(f, i),
    }
}

/// Well-known vocabulary is abbreviated; everything else is written in full.
fn write_iri(f: &mut fmt::Formatter<'_>, i: &Iri) -> fmt::Result {
    let s = i.as_str();
    for (prefix, ns) in [("rdf", RDF_NS), ("owl", OWL_NS), ("rdfs", RDFS_NS)] {
        if let Some(local) = s.strip_prefix(ns) {
            if !local.is_empty() && local.chars().all(|c| c.is_ascii_alphanumeric()) {
                return write!(f, "{prefix}:{local}");
            }
        }
    }
    write!(f, "<{s}>")
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for e in &self.0 {
            f.write_str(" ")?;
            match e {
                Element::Triple(t) => {
                    write_term(f, &t.subject)?;
                    f.write_str(" ")?;
                    write_term(f, &t.predicate)?;
                    f.write_str(" ")?;
                    write_term(f, &t.object)?;
                    f.write_str(" .")?;
                }
                Element::Group(g) => write!(f, "{g}")?,
                Element::Union(branches) => {
                    for (i, b) in branches.iter().enumerate() {
                        if i > 0 {
                            f.write_str(" UNION ")?;
                        }
                        write!(f, "{b}")?;
                    }
                }
                Element::Filter(Filter::False) => f.write_str("FILTER(false)")?,
                Element::Filter(Filter::NotExists(g)) => write!(f, "FILTER NOT EXISTS {g}")?,
                Element::Minus(g) => write!(f, "MINUS {g}")?,
                Element::Values { var, values } => {
                    write!(f, "VALUES ?{var} {{")?;
                    for v in values {
                        f.write_str(" ")?;
                        write_iri(f, v)?;
                    }
                    f.write_str(" }")?;
                }
                Element::SubSelect(s) => write!(f, "{{ {s} }}")?,
            }
        }
        f.write_str(" }")
    }
}

impl fmt::Display for Select {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        for v in &self.projection {
            write!(f, "?{v} ")?;
        }
        write!(f, "WHERE {}", self.pattern)?;
        if !self.group_by.is_empty() {
            f.write_str(" GROUP BY")?;
            for v in &self.group_by {
                write!(f, " ?{v}")?;
            }
        }
        if let Some(h) = &self.having {
            write!(f, " HAVING (COUNT(DISTINCT ?{}) >= {})", h.var, h.min)?;
        }
        Ok(())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, ns) in &self.prefixes {
            writeln!(f, "PREFIX {p}: <{ns}>")?;
        }
        write!(f, "{}", self.select)
    }
}

pub fn rdf_type() -> TermPattern {
    TermPattern::Iri(Iri::new(iri::RDF_TYPE).expect("valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_a_small_query() {
        let x = TermPattern::var("x");
        let q = Query::with_standard_prefixes(Select {
            distinct: true,
            projection: vec!["x".into()],
            pattern: Group(vec![
                Element::Triple(TriplePattern {
                    subject: x.clone(),
                    predicate: rdf_type(),
                    object: TermPattern::Iri(Iri::new("http://e/A").unwrap()),
                }),
                Element::Filter(Filter::False),
            ]),
            group_by: vec![],
            having: None,
        });
        assert_eq!(
            q.to_string(),
            "PREFIX owl: <http://www.w3.org/2002/07/owl#>\n\
             PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>\n\
             PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n\
             SELECT DISTINCT ?x WHERE { ?x rdf:type <http://e/A> . FILTER(false) }"
        );
    }
}

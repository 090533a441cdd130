//! Structural translation of class expressions into SELECT queries.
//!
//! Each expression becomes a graph pattern over one variable. Negation and
//! universal restrictions need a pattern for "all individuals"; which one is
//! configurable through [`Universe`]. Patterns that contain a subselect are
//! negated with MINUS rather than FILTER NOT EXISTS, because endpoints
//! disagree on how outer bindings reach into subqueries.

use conceptlearn_core::expr::ClassExpression as CE;
use conceptlearn_core::hierarchy::ClassHierarchy;
use conceptlearn_core::iri::{self, Iri};

use crate::algebra::{
    rdf_type, CountAtLeast, Element, Filter, Group, Query, Select, TermPattern, TriplePattern,
};

pub const ROOT_VARIABLE: &str = "x";

/// Pattern standing in for the individual universe.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Universe {
    /// `?v rdf:type owl:NamedIndividual`.
    #[default]
    NamedIndividual,
    /// `?v ?p ?o`: anything occurring as a subject.
    AnySubject,
    /// An explicit enumeration.
    Values(Vec<Iri>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    /// Enumerate every subclass of a named class in a VALUES block, so the
    /// endpoint needs no RDFS inference.
    pub expand_hierarchy: bool,
    pub universe: Universe,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            expand_hierarchy: true,
            universe: Universe::NamedIndividual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledQuery {
    pub query: Query,
    pub query_text: String,
    pub root_variable: String,
    /// Number of fresh variables allocated.
    pub fresh_variable_counter: usize,
}

pub fn compile(expr: &CE, hierarchy: &ClassHierarchy, expand_hierarchy: bool) -> CompiledQuery {
    compile_with(
        expr,
        hierarchy,
        &CompileOptions {
            expand_hierarchy,
            ..CompileOptions::default()
        },
    )
}

pub fn compile_with(
    expr: &CE,
    hierarchy: &ClassHierarchy,
    options: &CompileOptions,
) -> CompiledQuery {
    let mut c = Compiler {
        hierarchy,
        options,
        counter: 0,
    };
    let pattern = Group(c.pattern(expr, ROOT_VARIABLE));
    let query = Query::with_standard_prefixes(Select {
        distinct: true,
        projection: vec![ROOT_VARIABLE.into()],
        pattern,
        group_by: vec![],
        having: None,
    });
    CompiledQuery {
        query_text: query.to_string(),
        query,
        root_variable: ROOT_VARIABLE.into(),
        fresh_variable_counter: c.counter,
    }
}

struct Compiler<'a> {
    hierarchy: &'a ClassHierarchy,
    options: &'a CompileOptions,
    counter: usize,
}

fn triple(s: TermPattern, p: TermPattern, o: TermPattern) -> Element {
    Element::Triple(TriplePattern {
        subject: s,
        predicate: p,
        object: o,
    })
}

fn contains_subselect(g: &Group) -> bool {
    g.0.iter().any(|e| match e {
        Element::SubSelect(_) => true,
        Element::Group(g) | Element::Minus(g) | Element::Filter(Filter::NotExists(g)) => {
            contains_subselect(g)
        }
        Element::Union(gs) => gs.iter().any(contains_subselect),
        _ => false,
    })
}

fn negate(g: Group) -> Element {
    if contains_subselect(&g) {
        Element::Minus(g)
    } else {
        Element::Filter(Filter::NotExists(g))
    }
}

impl Compiler<'_> {
    fn fresh(&mut self, prefix: &str) -> String {
        let v = format!("{prefix}{}", self.counter);
        self.counter += 1;
        v
    }

    fn universe(&mut self, v: &str) -> Vec<Element> {
        match &self.options.universe {
            Universe::NamedIndividual => vec![triple(
                TermPattern::var(v),
                rdf_type(),
                TermPattern::Iri(Iri::new(iri::OWL_NAMED_INDIVIDUAL).expect("valid")),
            )],
            Universe::AnySubject => {
                // one index for the pair
                let n = self.fresh("");
                let (p, o) = (format!("p{n}"), format!("o{n}"));
                vec![triple(
                    TermPattern::var(v),
                    TermPattern::var(p),
                    TermPattern::var(o),
                )]
            }
            Universe::Values(values) => vec![Element::Values {
                var: v.into(),
                values: values.clone(),
            }],
        }
    }

    fn named(&mut self, a: &Iri, v: &str) -> Vec<Element> {
        let expansion = match self.hierarchy.id_of(a) {
            Ok(id) if self.options.expand_hierarchy => {
                let subs = self.hierarchy.sub_closure(id);
                (subs.count() > 1).then(|| {
                    let mut values: Vec<Iri> = subs
                        .iter()
                        .map(|s| self.hierarchy.class(s).clone())
                        .collect();
                    values.sort();
                    values
                })
            }
            _ => None,
        };
        match expansion {
            Some(values) => {
                let c = self.fresh("c");
                vec![
                    Element::Values {
                        var: c.clone(),
                        values,
                    },
                    triple(TermPattern::var(v), rdf_type(), TermPattern::var(c)),
                ]
            }
            None => vec![triple(
                TermPattern::var(v),
                rdf_type(),
                TermPattern::Iri(a.clone()),
            )],
        }
    }

    fn pattern(&mut self, e: &CE, v: &str) -> Vec<Element> {
        match e {
            CE::Named(a) if a.as_str() == iri::OWL_THING => self.universe(v),
            CE::Named(a) if a.as_str() == iri::OWL_NOTHING => vec![Element::Filter(Filter::False)],
            CE::Named(a) => self.named(a, v),
            CE::Top => self.universe(v),
            CE::Bottom => vec![Element::Filter(Filter::False)],
            CE::Not(c) => {
                let mut out = self.universe(v);
                let inner = Group(self.pattern(c, v));
                out.push(negate(inner));
                out
            }
            CE::And(cs) => cs.iter().flat_map(|c| self.pattern(c, v)).collect(),
            CE::Or(cs) => vec![Element::Union(
                cs.iter().map(|c| Group(self.pattern(c, v))).collect(),
            )],
            CE::Some { role, filler } => {
                let w = self.fresh("s");
                let mut out = vec![triple(
                    TermPattern::var(v),
                    TermPattern::Iri(role.clone()),
                    TermPattern::var(w.clone()),
                )];
                out.extend(self.pattern(filler, &w));
                out
            }
            CE::Only { role, filler } => {
                let mut out = self.universe(v);
                let w = self.fresh("s");
                let edge = triple(
                    TermPattern::var(v),
                    TermPattern::Iri(role.clone()),
                    TermPattern::var(w.clone()),
                );
                let target = Group(self.pattern(filler, &w));
                let violation = Group(vec![edge, negate(target)]);
                out.push(negate(violation));
                out
            }
            CE::Min { n, role, filler } => {
                let w = self.fresh("s");
                let mut inner = vec![triple(
                    TermPattern::var(v),
                    TermPattern::Iri(role.clone()),
                    TermPattern::var(w.clone()),
                )];
                inner.extend(self.pattern(filler, &w));
                vec![Element::SubSelect(Box::new(Select {
                    distinct: false,
                    projection: vec![v.into()],
                    pattern: Group(inner),
                    group_by: vec![v.into()],
                    having: Some(CountAtLeast { var: w, min: *n }),
                }))]
            }
        }
    }
}

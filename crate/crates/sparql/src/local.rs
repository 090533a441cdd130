//! In-memory evaluation of the emitted query fragment.
//!
//! Follows SPARQL 1.1 semantics for this fragment: group elements are
//! joined left to right, MINUS applies to what precedes it, filters apply
//! to the whole group, subselects are evaluated bottom-up, and FILTER NOT
//! EXISTS substitutes the current solution into its pattern.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use conceptlearn_core::expr::ClassExpression;
use conceptlearn_core::hierarchy::ClassHierarchy;
use conceptlearn_core::iri::Iri;
use conceptlearn_core::ntriples::{Term, Triple};

use crate::algebra::{Element, Filter, Group, Query, Select, TermPattern, TriplePattern};
use crate::compile::{compile_with, CompileOptions};

pub type Solution = BTreeMap<String, Term>;

/// Triple set with subject and predicate indexes.
#[derive(Clone, Debug, Default)]
pub struct LocalStore {
    triples: Vec<Triple>,
    by_subject: HashMap<Iri, Vec<usize>>,
    by_predicate: HashMap<Iri, Vec<usize>>,
}

impl LocalStore {
    pub fn new(triples: &[Triple]) -> Self {
        let unique: BTreeSet<Triple> = triples.iter().cloned().collect();
        let triples: Vec<Triple> = unique.into_iter().collect();
        let mut by_subject: HashMap<Iri, Vec<usize>> = HashMap::new();
        let mut by_predicate: HashMap<Iri, Vec<usize>> = HashMap::new();
        for (i, t) in triples.iter().enumerate() {
            by_subject.entry(t.subject.clone()).or_default().push(i);
            by_predicate.entry(t.predicate.clone()).or_default().push(i);
        }
        Self {
            triples,
            by_subject,
            by_predicate,
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn query(&self, query: &Query) -> Vec<Solution> {
        self.select(&query.select)
    }

    pub fn select(&self, select: &Select) -> Vec<Solution> {
        let rows = self.group(&select.pattern, &Solution::new());
        let mut out: Vec<Solution> = if select.group_by.is_empty() {
            rows.into_iter()
                .map(|r| project(&r, &select.projection))
                .collect()
        } else {
            let mut groups: BTreeMap<Vec<Option<Term>>, BTreeSet<Option<Term>>> = BTreeMap::new();
            for r in &rows {
                let key = select.group_by.iter().map(|v| r.get(v).cloned()).collect();
                let counted = select.having.as_ref().and_then(|h| r.get(&h.var).cloned());
                groups.entry(key).or_default().insert(counted);
            }
            groups
                .into_iter()
                .filter(|(_, counted)| match &select.having {
                    Some(h) => counted.iter().flatten().count() >= h.min as usize,
                    None => true,
                })
                .map(|(key, _)| {
                    let row: Solution = select
                        .group_by
                        .iter()
                        .zip(key)
                        .filter_map(|(v, t)| t.map(|t| (v.clone(), t)))
                        .collect();
                    project(&row, &select.projection)
                })
                .collect()
        };
        if select.distinct {
            let unique: BTreeSet<Solution> = out.into_iter().collect();
            out = unique.into_iter().collect();
        }
        out
    }

    /// Solutions of `group`, each extending `seed`.
    fn group(&self, group: &Group, seed: &Solution) -> Vec<Solution> {
        let mut sols = vec![seed.clone()];
        let mut filters = Vec::new();
        for e in &group.0 {
            match e {
                Element::Triple(t) => {
                    sols = sols.iter().flat_map(|s| self.match_triple(t, s)).collect();
                }
                Element::Group(g) => sols = join(&sols, &self.group(g, seed)),
                Element::Union(branches) => {
                    let right: Vec<Solution> =
                        branches.iter().flat_map(|b| self.group(b, seed)).collect();
                    sols = join(&sols, &right);
                }
                Element::Filter(f) => filters.push(f),
                Element::Minus(g) => {
                    let right = self.group(g, seed);
                    sols.retain(|l| {
                        !right.iter().any(|r| {
                            compatible(l, r)
                                && r.keys().any(|k| l.contains_key(k) && !seed.contains_key(k))
                        })
                    });
                }
                Element::Values { var, values } => {
                    let right: Vec<Solution> = values
                        .iter()
                        .map(|v| Solution::from([(var.clone(), Term::Iri(v.clone()))]))
                        .collect();
                    sols = join(&sols, &right);
                }
                Element::SubSelect(s) => sols = join(&sols, &self.select(s)),
            }
            if sols.is_empty() {
                break;
            }
        }
        for f in filters {
            match f {
                Filter::False => sols.clear(),
                Filter::NotExists(g) => sols.retain(|s| self.group(g, s).is_empty()),
            }
        }
        sols
    }

    fn match_triple(&self, t: &TriplePattern, s: &Solution) -> Vec<Solution> {
        let resolve = |p: &TermPattern| -> Option<Term> {
            match p {
                TermPattern::Iri(i) => Some(Term::Iri(i.clone())),
                TermPattern::Var(v) => s.get(v).cloned(),
            }
        };
        let (subj, pred) = (resolve(&t.subject), resolve(&t.predicate));
        let candidates: Vec<usize> = match (&subj, &pred) {
            (Some(Term::Iri(i)), _) => self.by_subject.get(i).cloned().unwrap_or_default(),
            (None, Some(Term::Iri(p))) => self.by_predicate.get(p).cloned().unwrap_or_default(),
            (None, None) => (0..self.triples.len()).collect(),
            _ => return Vec::new(),
        };
        let mut out = Vec::new();
        'triples: for i in candidates {
            let triple = &self.triples[i];
            let mut row = s.clone();
            for (pattern, value) in [
                (&t.subject, Term::Iri(triple.subject.clone())),
                (&t.predicate, Term::Iri(triple.predicate.clone())),
                (&t.object, triple.object.clone()),
            ] {
                match pattern {
                    TermPattern::Iri(c) => {
                        if value != Term::Iri(c.clone()) {
                            continue 'triples;
                        }
                    }
                    TermPattern::Var(v) => match row.get(v) {
                        Some(bound) if *bound != value => continue 'triples,
                        Some(_) => {}
                        None => {
                            row.insert(v.clone(), value);
                        }
                    },
                }
            }
            out.push(row);
        }
        out
    }
}

fn project(row: &Solution, vars: &[String]) -> Solution {
    vars.iter()
        .filter_map(|v| row.get(v).map(|t| (v.clone(), t.clone())))
        .collect()
}

fn compatible(a: &Solution, b: &Solution) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .all(|(k, v)| large.get(k).is_none_or(|w| w == v))
}

fn join(left: &[Solution], right: &[Solution]) -> Vec<Solution> {
    let mut out = Vec::new();
    for l in left {
        for r in right {
            if compatible(l, r) {
                let mut m = l.clone();
                m.extend(r.iter().map(|(k, v)| (k.clone(), v.clone())));
                out.push(m);
            }
        }
    }
    out
}

/// Retrieval through the compiled query, evaluated in memory.
pub fn evaluate_locally(
    store: &LocalStore,
    hierarchy: &ClassHierarchy,
    expr: &ClassExpression,
    options: &CompileOptions,
) -> BTreeSet<Iri> {
    let compiled = compile_with(expr, hierarchy, options);
    store
        .query(&compiled.query)
        .into_iter()
        .filter_map(|row| match row.get(&compiled.root_variable) {
            Some(Term::Iri(i)) => Some(i.clone()),
            _ => None,
        })
        .collect()
}

//! Set semantics read straight off the triples, with its own line reader
//! and its own subclass fixpoint. Shares nothing with the reasoner but the
//! expression type.

use std::collections::{BTreeMap, BTreeSet};

use conceptlearn_core::ClassExpression as CE;

const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const SUBCLASS: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
const OWL: &str = "http://www.w3.org/2002/07/owl#";

pub struct TripleOracle {
    pub universe: BTreeSet<String>,
    pub classes: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    types: BTreeMap<String, BTreeSet<String>>,
    edges: BTreeSet<(String, String, String)>,
}

/// `<s> <p> <o> .` lines only; literal objects and comments are skipped.
fn iri_triples(text: &str) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = Vec::new();
        let mut rest = line;
        while let Some(start) = rest.find('<') {
            if rest[..start].contains('"') {
                break;
            }
            let end = rest[start..].find('>').expect("closing >") + start;
            parts.push(rest[start + 1..end].to_string());
            rest = &rest[end + 1..];
        }
        if let [s, p, o] = &parts[..] {
            out.push((s.clone(), p.clone(), o.clone()));
        }
    }
    out
}

impl TripleOracle {
    pub fn new(ntriples: &str) -> Self {
        let mut universe = BTreeSet::new();
        let mut classes = BTreeSet::new();
        let mut roles = BTreeSet::new();
        let mut asserted = Vec::new();
        let mut sub = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for (s, p, o) in iri_triples(ntriples) {
            if p == RDF_TYPE {
                match o.strip_prefix(OWL) {
                    Some("NamedIndividual") => {
                        universe.insert(s);
                    }
                    Some("ObjectProperty") => {
                        roles.insert(s);
                    }
                    Some("Class") => {
                        classes.insert(s);
                    }
                    Some(_) => {}
                    None => asserted.push((s, o)),
                }
            } else if p == SUBCLASS {
                sub.insert((s, o));
            } else {
                edges.insert((s, p, o));
            }
        }
        edges.retain(|(_, p, _)| roles.contains(p));
        let mut types: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (x, c) in asserted {
            types.entry(x).or_default().insert(c);
        }
        loop {
            let mut changed = false;
            for set in types.values_mut() {
                let extra: Vec<String> = sub
                    .iter()
                    .filter(|(a, b)| set.contains(a) && !set.contains(b))
                    .map(|(_, b)| b.clone())
                    .collect();
                changed |= !extra.is_empty();
                set.extend(extra);
            }
            if !changed {
                break;
            }
        }
        Self {
            universe,
            classes,
            roles,
            types,
            edges,
        }
    }

    pub fn successors<'a>(
        &'a self,
        x: &'a str,
        role: &'a str,
    ) -> impl Iterator<Item = &'a String> + 'a {
        self.edges
            .iter()
            .filter(move |(s, p, _)| s == x && p == role)
            .map(|(_, _, o)| o)
    }

    pub fn has_type(&self, x: &str, class: &str) -> bool {
        self.types.get(x).is_some_and(|t| t.contains(class))
    }

    pub fn eval(&self, e: &CE) -> BTreeSet<String> {
        let all = self.universe.clone();
        match e {
            CE::Top => all,
            CE::Bottom => BTreeSet::new(),
            CE::Named(a) if a.as_str() == format!("{OWL}Thing") => all,
            CE::Named(a) if a.as_str() == format!("{OWL}Nothing") => BTreeSet::new(),
            CE::Named(a) => all
                .into_iter()
                .filter(|x| self.has_type(x, a.as_str()))
                .collect(),
            CE::Not(c) => all.difference(&self.eval(c)).cloned().collect(),
            CE::And(cs) => cs.iter().fold(all, |acc, c| {
                acc.intersection(&self.eval(c)).cloned().collect()
            }),
            CE::Or(cs) => cs.iter().fold(BTreeSet::new(), |acc, c| {
                acc.union(&self.eval(c)).cloned().collect()
            }),
            CE::Some { role, filler } => {
                let f = self.eval(filler);
                all.into_iter()
                    .filter(|x| self.successors(x, role.as_str()).any(|y| f.contains(y)))
                    .collect()
            }
            CE::Only { role, filler } => {
                let f = self.eval(filler);
                all.into_iter()
                    .filter(|x| self.successors(x, role.as_str()).all(|y| f.contains(y)))
                    .collect()
            }
            CE::Min { n, role, filler } => {
                let f = self.eval(filler);
                all.into_iter()
                    .filter(|x| {
                        self.successors(x, role.as_str())
                            .filter(|y| f.contains(*y))
                            .count()
                            >= *n as usize
                    })
                    .collect()
            }
        }
    }
}

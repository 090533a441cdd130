//! In-memory knowledge base: vocabulary, told class hierarchy and ABox indexes.
//!
//! Everything is keyed by dense indexes assigned in IRI order, so the
//! resulting structure does not depend on the order triples arrived in.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::iri::{self, Interner, Iri};
use crate::ntriples::{Term, Triple};

/// Logical axioms recognised in the input graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    SubClassOf {
        sub: Iri,
        sup: Iri,
    },
    ClassAssertion {
        individual: Iri,
        class: Iri,
    },
    ObjectPropertyAssertion {
        subject: Iri,
        role: Iri,
        object: Iri,
    },
    ObjectPropertyDeclaration(Iri),
    ClassDeclaration(Iri),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct KbStatistics {
    pub individuals: usize,
    pub classes: usize,
    pub roles: usize,
}

#[derive(Debug, Default)]
pub struct KnowledgeBase {
    classes: Vec<Iri>,
    class_index: HashMap<Iri, usize>,
    roles: Vec<Iri>,
    role_index: HashMap<Iri, usize>,
    individuals: Vec<Iri>,
    individual_index: HashMap<Iri, usize>,
    /// class -> told direct superclasses
    told_supers: Vec<Vec<usize>>,
    /// class -> told direct subclasses
    told_subs: Vec<Vec<usize>>,
    /// class -> asserted members
    members: Vec<Vec<usize>>,
    /// individual -> asserted classes
    types: Vec<Vec<usize>>,
    /// role -> subject -> objects
    successors: Vec<Vec<Vec<usize>>>,
    /// role -> object -> subjects
    predecessors: Vec<Vec<Vec<usize>>>,
    literal_assertions: Vec<Triple>,
    warnings: Vec<String>,
}

impl KnowledgeBase {
    /// Builds the indexes from a set of triples.
    ///
    /// Declarations are collected in a first pass so that assertions can be
    /// classified regardless of where the declaration appears. Triples that
    /// match no rule are reported through [`KnowledgeBase::warnings`].
    pub fn from_triples(triples: &[Triple]) -> Result<Self> {
        let rdf_type = iri::RDF_TYPE;
        let mut interner = Interner::new();
        let mut classes = BTreeSet::new();
        let mut roles = BTreeSet::new();
        let mut data_props = BTreeSet::new();
        let mut declared_individuals = BTreeSet::new();

        for t in triples {
            if t.predicate.as_str() == rdf_type {
                match t.object.as_iri().map(Iri::as_str) {
                    Some(iri::OWL_CLASS) => {
                        classes.insert(interner.intern(&t.subject));
                    }
                    Some(iri::OWL_OBJECT_PROPERTY) => {
                        roles.insert(interner.intern(&t.subject));
                    }
                    Some(iri::OWL_DATATYPE_PROPERTY) => {
                        data_props.insert(interner.intern(&t.subject));
                    }
                    Some(iri::OWL_NAMED_INDIVIDUAL) => {
                        declared_individuals.insert(interner.intern(&t.subject));
                    }
                    _ => {}
                }
            } else if matches!(
                t.predicate.as_str(),
                iri::RDFS_SUBCLASS_OF | iri::OWL_EQUIVALENT_CLASS
            ) {
                if let Some(o) = t.object.as_iri() {
                    classes.insert(interner.intern(&t.subject));
                    classes.insert(interner.intern(o));
                }
            }
        }
        classes.remove(iri::OWL_THING);
        classes.remove(iri::OWL_NOTHING);

        if let Some(clash) = classes.intersection(&roles).next() {
            return Err(Error::VocabularyClash {
                iri: clash.to_string(),
            });
        }

        let mut sub_edges = BTreeSet::new();
        let mut type_assertions = BTreeSet::new();
        let mut role_assertions = BTreeSet::new();
        let mut literal_assertions = BTreeSet::new();
        let mut warnings = Vec::new();
        let mut individuals = declared_individuals;

        for t in triples {
            let p = t.predicate.as_str();
            match (p, &t.object) {
                (iri::RDF_TYPE, Term::Iri(o)) => {
                    let o = o.as_str();
                    if matches!(
                        o,
                        iri::OWL_CLASS
                            | iri::OWL_OBJECT_PROPERTY
                            | iri::OWL_DATATYPE_PROPERTY
                            | iri::OWL_NAMED_INDIVIDUAL
                            | iri::OWL_ONTOLOGY
                    ) {
                        continue;
                    }
                    if o == iri::OWL_THING {
                        individuals.insert(interner.intern(&t.subject));
                    } else if classes.contains(o) {
                        let ind = interner.intern(&t.subject);
                        individuals.insert(ind.clone());
                        let class = classes.get(o).cloned().expect("checked above");
                        type_assertions.insert((ind, class));
                    } else {
                        warnings.push(format!("ignored: {t} (object is not a declared class)"));
                    }
                }
                (iri::RDFS_SUBCLASS_OF, Term::Iri(o)) => {
                    let sub = interner.intern(&t.subject);
                    let sup = interner.intern(o);
                    if sup.as_str() != iri::OWL_THING && sub != sup {
                        sub_edges.insert((sub, sup));
                    }
                }
                (iri::OWL_EQUIVALENT_CLASS, Term::Iri(o)) => {
                    let a = interner.intern(&t.subject);
                    let b = interner.intern(o);
                    if a != b {
                        sub_edges.insert((a.clone(), b.clone()));
                        sub_edges.insert((b, a));
                    }
                }
                _ if roles.contains(p) => match &t.object {
                    Term::Iri(o) => {
                        let s = interner.intern(&t.subject);
                        let o = interner.intern(o);
                        individuals.insert(s.clone());
                        individuals.insert(o.clone());
                        role_assertions.insert((s, interner.intern(&t.predicate), o));
                    }
                    Term::Literal(_) => warnings.push(format!(
                        "ignored: {t} (literal object of an object property)"
                    )),
                },
                _ if data_props.contains(p) => {
                    literal_assertions.insert(t.clone());
                }
                (iri::RDFS_LABEL | iri::RDFS_COMMENT, _) => {}
                _ => warnings.push(format!("ignored: {t} (no matching rule)")),
            }
        }
        // Equivalence with owl:Thing would make every class a subclass
        // of an unnamed root; drop such edges.
        sub_edges.retain(|(a, b)| classes.contains(a) && classes.contains(b));

        let classes: Vec<Iri> = classes.into_iter().collect();
        let roles: Vec<Iri> = roles.into_iter().collect();
        let individuals: Vec<Iri> = individuals
            .into_iter()
            .filter(|i| !classes.contains(i) && !roles.contains(i))
            .collect();
        let class_index = index_of(&classes);
        let role_index = index_of(&roles);
        let individual_index = index_of(&individuals);

        let mut told_supers = vec![Vec::new(); classes.len()];
        let mut told_subs = vec![Vec::new(); classes.len()];
        for (sub, sup) in &sub_edges {
            let (s, p) = (class_index[sub], class_index[sup]);
            told_supers[s].push(p);
            told_subs[p].push(s);
        }

        let mut members = vec![Vec::new(); classes.len()];
        let mut types = vec![Vec::new(); individuals.len()];
        for (ind, class) in &type_assertions {
            let Some(&i) = individual_index.get(ind) else {
                continue;
            };
            let c = class_index[class];
            members[c].push(i);
            types[i].push(c);
        }

        let mut successors = vec![vec![Vec::new(); individuals.len()]; roles.len()];
        let mut predecessors = vec![vec![Vec::new(); individuals.len()]; roles.len()];
        for (s, r, o) in &role_assertions {
            let (Some(&si), Some(&oi)) = (individual_index.get(s), individual_index.get(o)) else {
                continue;
            };
            let ri = role_index[r];
            successors[ri][si].push(oi);
            predecessors[ri][oi].push(si);
        }
        for list in told_supers
            .iter_mut()
            .chain(told_subs.iter_mut())
            .chain(members.iter_mut())
            .chain(types.iter_mut())
            .chain(successors.iter_mut().flatten())
            .chain(predecessors.iter_mut().flatten())
        {
            list.sort_unstable();
            list.dedup();
        }
        warnings.sort();
        warnings.dedup();

        Ok(Self {
            classes,
            class_index,
            roles,
            role_index,
            individuals,
            individual_index,
            told_supers,
            told_subs,
            members,
            types,
            successors,
            predecessors,
            literal_assertions: literal_assertions.into_iter().collect(),
            warnings,
        })
    }

    pub fn classes(&self) -> &[Iri] {
        &self.classes
    }

    pub fn roles(&self) -> &[Iri] {
        &self.roles
    }

    /// The fixed individual universe, sorted by IRI.
    pub fn individuals(&self) -> &[Iri] {
        &self.individuals
    }

    pub fn class_id(&self, class: &Iri) -> Option<usize> {
        self.class_index.get(class).copied()
    }

    pub fn role_id(&self, role: &Iri) -> Option<usize> {
        self.role_index.get(role).copied()
    }

    pub fn individual_id(&self, individual: &Iri) -> Option<usize> {
        self.individual_index.get(individual).copied()
    }

    pub fn told_superclasses(&self, class: usize) -> &[usize] {
        &self.told_supers[class]
    }

    pub fn told_subclasses(&self, class: usize) -> &[usize] {
        &self.told_subs[class]
    }

    /// Individuals asserted directly into `class` (no hierarchy reasoning).
    pub fn asserted_members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    pub fn asserted_types(&self, individual: usize) -> &[usize] {
        &self.types[individual]
    }

    pub fn successors(&self, role: usize, subject: usize) -> &[usize] {
        &self.successors[role][subject]
    }

    pub fn predecessors(&self, role: usize, object: usize) -> &[usize] {
        &self.predecessors[role][object]
    }

    /// Data-property assertions; stored but unused by the learners.
    pub fn literal_assertions(&self) -> &[Triple] {
        &self.literal_assertions
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn statistics(&self) -> KbStatistics {
        KbStatistics {
            individuals: self.individuals.len(),
            classes: self.classes.len(),
            roles: self.roles.len(),
        }
    }

    /// All recognised axioms in canonical order.
    pub fn axioms(&self) -> Vec<Axiom> {
        let mut out = Vec::new();
        out.extend(self.classes.iter().cloned().map(Axiom::ClassDeclaration));
        out.extend(
            self.roles
                .iter()
                .cloned()
                .map(Axiom::ObjectPropertyDeclaration),
        );
        for (sub, sups) in self.told_supers.iter().enumerate() {
            for &sup in sups {
                out.push(Axiom::SubClassOf {
                    sub: self.classes[sub].clone(),
                    sup: self.classes[sup].clone(),
                });
            }
        }
        for (ind, classes) in self.types.iter().enumerate() {
            for &c in classes {
                out.push(Axiom::ClassAssertion {
                    individual: self.individuals[ind].clone(),
                    class: self.classes[c].clone(),
                });
            }
        }
        for (role, by_subject) in self.successors.iter().enumerate() {
            for (s, objects) in by_subject.iter().enumerate() {
                for &o in objects {
                    out.push(Axiom::ObjectPropertyAssertion {
                        subject: self.individuals[s].clone(),
                        role: self.roles[role].clone(),
                        object: self.individuals[o].clone(),
                    });
                }
            }
        }
        out.sort();
        out
    }

    /// Looks up classes and roles by local name, for parsing user input.
    pub fn symbols(&self) -> SymbolTable {
        let mut classes: BTreeMap<String, Vec<Iri>> = BTreeMap::new();
        for c in &self.classes {
            classes
                .entry(c.local_name().to_owned())
                .or_default()
                .push(c.clone());
        }
        let mut roles: BTreeMap<String, Vec<Iri>> = BTreeMap::new();
        for r in &self.roles {
            roles
                .entry(r.local_name().to_owned())
                .or_default()
                .push(r.clone());
        }
        SymbolTable {
            classes,
            roles,
            class_iris: self.class_index.keys().cloned().collect(),
            role_iris: self.role_index.keys().cloned().collect(),
        }
    }
}

fn index_of(items: &[Iri]) -> HashMap<Iri, usize> {
    items
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, x)| (x, i))
        .collect()
}

/// Name resolution for the expression parser.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    classes: BTreeMap<String, Vec<Iri>>,
    roles: BTreeMap<String, Vec<Iri>>,
    class_iris: BTreeSet<Iri>,
    role_iris: BTreeSet<Iri>,
}

impl SymbolTable {
    pub fn resolve_class(&self, symbol: &str) -> Result<Iri> {
        resolve(symbol, &self.classes, &self.class_iris, |s| {
            Error::UnknownClass(s.to_owned())
        })
    }

    pub fn resolve_role(&self, symbol: &str) -> Result<Iri> {
        resolve(symbol, &self.roles, &self.role_iris, |s| {
            Error::UnknownRole(s.to_owned())
        })
    }
}

fn resolve(
    symbol: &str,
    by_name: &BTreeMap<String, Vec<Iri>>,
    full: &BTreeSet<Iri>,
    unknown: impl Fn(&str) -> Error,
) -> Result<Iri> {
    if let Some(hit) = full.get(symbol) {
        return Ok(hit.clone());
    }
    match by_name.get(symbol).map(Vec::as_slice) {
        Some([single]) => Ok(single.clone()),
        Some(many) if !many.is_empty() => Err(Error::AmbiguousSymbol {
            symbol: symbol.to_owned(),
            candidates: many.iter().map(Iri::to_string).collect(),
        }),
        _ => Err(unknown(symbol)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntriples::parse_ntriples;

    const SMALL: &str = r#"
<http://x/A> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .
<http://x/B> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://x/A> .
<http://x/r> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#ObjectProperty> .
<http://x/i> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/B> .
<http://x/i> <http://x/r> <http://x/j> .
<http://x/i> <http://x/unknown> <http://x/j> .
"#;

    #[test]
    fn builds_indexes() {
        let kb = KnowledgeBase::from_triples(&parse_ntriples(SMALL).unwrap()).unwrap();
        assert_eq!(kb.classes().len(), 2);
        assert_eq!(kb.roles().len(), 1);
        assert_eq!(kb.individuals().len(), 2);
        let b = kb.class_id(&Iri::new("http://x/B").unwrap()).unwrap();
        let a = kb.class_id(&Iri::new("http://x/A").unwrap()).unwrap();
        assert_eq!(kb.told_superclasses(b), &[a]);
        assert_eq!(kb.told_subclasses(a), &[b]);
        let i = kb.individual_id(&Iri::new("http://x/i").unwrap()).unwrap();
        let j = kb.individual_id(&Iri::new("http://x/j").unwrap()).unwrap();
        assert_eq!(kb.successors(0, i), &[j]);
        assert_eq!(kb.predecessors(0, j), &[i]);
        assert_eq!(kb.asserted_members(b), &[i]);
        assert_eq!(kb.warnings().len(), 1);
    }

    #[test]
    fn empty_kb() {
        let kb = KnowledgeBase::from_triples(&[]).unwrap();
        assert!(kb.individuals().is_empty());
        assert!(kb.classes().is_empty());
        assert!(kb.roles().is_empty());
    }

    #[test]
    fn class_and_property_clash_is_an_error() {
        let doc = r#"
<http://x/A> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .
<http://x/A> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#ObjectProperty> .
"#;
        let err = KnowledgeBase::from_triples(&parse_ntriples(doc).unwrap()).unwrap_err();
        assert!(matches!(err, Error::VocabularyClash { .. }));
    }

    #[test]
    fn symbol_lookup() {
        let kb = KnowledgeBase::from_triples(&parse_ntriples(SMALL).unwrap()).unwrap();
        let symbols = kb.symbols();
        assert_eq!(symbols.resolve_class("B").unwrap().as_str(), "http://x/B");
        assert_eq!(
            symbols.resolve_class("http://x/B").unwrap().as_str(),
            "http://x/B"
        );
        assert!(matches!(
            symbols.resolve_class("C"),
            Err(Error::UnknownClass(_))
        ));
        assert!(matches!(
            symbols.resolve_role("B"),
            Err(Error::UnknownRole(_))
        ));
    }
}

//! Retrieval backend that answers every query through a SPARQL endpoint.
//!
//! Only the schema and the individual list are fetched up front; the
//! hierarchy is classified locally so that compiled queries can enumerate
//! subclasses themselves.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use conceptlearn_core::backend::RetrievalBackend;
use conceptlearn_core::expr::ClassExpression;
use conceptlearn_core::hierarchy::ClassHierarchy;
use conceptlearn_core::iri::{self, Iri};
use conceptlearn_core::kb::KnowledgeBase;
use conceptlearn_core::ntriples::{Term, Triple};
use conceptlearn_core::problem::{Coverage, LearningProblem, QualityResult};
use conceptlearn_core::Result;

use crate::algebra::{rdf_type, Element, Group, Query, Select, TermPattern, TriplePattern};
use crate::client::SparqlClient;
use crate::compile::{compile_with, CompileOptions};
use crate::error::SparqlError;

pub struct EndpointBackend {
    client: SparqlClient,
    kb: KnowledgeBase,
    hierarchy: ClassHierarchy,
    options: CompileOptions,
    cache: Mutex<HashMap<ClassExpression, Arc<BTreeSet<Iri>>>>,
}

fn iri(s: &str) -> Iri {
    Iri::new(s).expect("valid vocabulary IRI")
}

fn select(vars: &[&str], patterns: Vec<(TermPattern, TermPattern, TermPattern)>) -> String {
    Query::with_standard_prefixes(Select {
        distinct: true,
        projection: vars.iter().map(|v| v.to_string()).collect(),
        pattern: Group(
            patterns
                .into_iter()
                .map(|(subject, predicate, object)| {
                    Element::Triple(TriplePattern {
                        subject,
                        predicate,
                        object,
                    })
                })
                .collect(),
        ),
        group_by: vec![],
        having: None,
    })
    .to_string()
}

fn var(v: &str) -> TermPattern {
    TermPattern::var(v)
}

fn constant(s: &str) -> TermPattern {
    TermPattern::Iri(iri(s))
}

impl EndpointBackend {
    /// Fetches classes, subclass and equivalence axioms, object properties
    /// and named individuals.
    pub fn connect(client: SparqlClient) -> std::result::Result<Self, SparqlError> {
        let mut triples = Vec::new();
        let typed = |class: &str| select(&["v"], vec![(var("v"), rdf_type(), constant(class))]);
        for class in [
            iri::OWL_CLASS,
            iri::OWL_OBJECT_PROPERTY,
            iri::OWL_NAMED_INDIVIDUAL,
        ] {
            for v in client.select(&typed(class))?.iris("v")? {
                triples.push(Triple::new(v, iri(iri::RDF_TYPE), Term::Iri(iri(class))));
            }
        }
        for axiom in [iri::RDFS_SUBCLASS_OF, iri::OWL_EQUIVALENT_CLASS] {
            let q = select(&["a", "b"], vec![(var("a"), constant(axiom), var("b"))]);
            for row in client.select(&q)?.rows_of(&["a", "b"])? {
                let [a, b]: [Iri; 2] = row.try_into().expect("two columns");
                triples.push(Triple::new(a, iri(axiom), Term::Iri(b)));
            }
        }
        let kb = KnowledgeBase::from_triples(&triples)
            .map_err(|e| SparqlError::Malformed(format!("schema: {e}")))?;
        let hierarchy = ClassHierarchy::classify(&kb);
        Ok(Self {
            client,
            kb,
            hierarchy,
            options: CompileOptions::default(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_options(mut self, options: CompileOptions) -> Self {
        self.options = options;
        self
    }

    pub fn client(&self) -> &SparqlClient {
        &self.client
    }

    /// Retrieval restricted to the individuals known to the schema.
    pub fn instances(
        &self,
        expr: &ClassExpression,
    ) -> std::result::Result<Arc<BTreeSet<Iri>>, SparqlError> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(expr) {
            return Ok(hit.clone());
        }
        let compiled = compile_with(expr, &self.hierarchy, &self.options);
        let found: BTreeSet<Iri> = self
            .client
            .execute(&compiled)?
            .into_iter()
            .filter(|x| self.kb.individual_id(x).is_some())
            .collect();
        let found = Arc::new(found);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(expr.clone(), found.clone());
        Ok(found)
    }
}

impl RetrievalBackend for EndpointBackend {
    fn knowledge_base(&self) -> &KnowledgeBase {
        &self.kb
    }

    fn hierarchy(&self) -> &ClassHierarchy {
        &self.hierarchy
    }

    fn coverage(&self, problem: &LearningProblem, expr: &ClassExpression) -> Result<Coverage> {
        problem.validate_against(&self.kb)?;
        let found = self.instances(expr)?;
        let tp = problem
            .positives()
            .iter()
            .filter(|x| found.contains(*x))
            .count() as u64;
        let fp = problem
            .negatives()
            .iter()
            .filter(|x| found.contains(*x))
            .count() as u64;
        Ok(Coverage {
            quality: QualityResult {
                tp,
                fp,
                tn: problem.negatives().len() as u64 - fp,
                fn_: problem.positives().len() as u64 - tp,
            },
            retrieved: found.len() as u64,
        })
    }

    fn asserted_types(&self, individual: &Iri) -> Result<Vec<Iri>> {
        let q = select(
            &["c"],
            vec![(TermPattern::Iri(individual.clone()), rdf_type(), var("c"))],
        );
        Ok(self
            .client
            .select(&q)?
            .iris("c")?
            .into_iter()
            .filter(|c| self.kb.class_id(c).is_some())
            .collect())
    }

    fn asserted_edges(&self, individual: &Iri) -> Result<Vec<(Iri, Iri)>> {
        let q = select(
            &["r", "y"],
            vec![(TermPattern::Iri(individual.clone()), var("r"), var("y"))],
        );
        Ok(self
            .client
            .select(&q)?
            .rows_of(&["r", "y"])?
            .into_iter()
            .filter(|row| self.kb.role_id(&row[0]).is_some())
            .map(|row| (row[0].clone(), row[1].clone()))
            .collect())
    }
}

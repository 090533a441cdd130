//! The retrieval interface learners run against.
//!
//! The in-memory [`Reasoner`] is one implementation; a triplestore-backed
//! implementation lives in the SPARQL crate.

use crate::error::{Error, Result};
use crate::expr::ClassExpression;
use crate::hierarchy::ClassHierarchy;
use crate::iri::Iri;
use crate::kb::KnowledgeBase;
use crate::problem::{self, Coverage, LearningProblem};
use crate::reasoner::Reasoner;

pub trait RetrievalBackend: Send + Sync {
    /// Vocabulary (and, for local backends, the ABox).
    fn knowledge_base(&self) -> &KnowledgeBase;

    fn hierarchy(&self) -> &ClassHierarchy;

    fn coverage(&self, problem: &LearningProblem, expr: &ClassExpression) -> Result<Coverage>;

    /// Named classes asserted for `individual`.
    fn asserted_types(&self, individual: &Iri) -> Result<Vec<Iri>>;

    /// Outgoing `(role, object)` edges of `individual`.
    fn asserted_edges(&self, individual: &Iri) -> Result<Vec<(Iri, Iri)>>;
}

impl RetrievalBackend for Reasoner {
    fn knowledge_base(&self) -> &KnowledgeBase {
        self.kb()
    }

    fn hierarchy(&self) -> &ClassHierarchy {
        Reasoner::hierarchy(self)
    }

    fn coverage(&self, problem: &LearningProblem, expr: &ClassExpression) -> Result<Coverage> {
        problem::coverage(self, problem, expr)
    }

    fn asserted_types(&self, individual: &Iri) -> Result<Vec<Iri>> {
        let kb = self.kb();
        let x = kb
            .individual_id(individual)
            .ok_or_else(|| Error::UnknownIndividual(individual.to_string()))?;
        Ok(kb
            .asserted_types(x)
            .iter()
            .map(|&c| kb.classes()[c].clone())
            .collect())
    }

    fn asserted_edges(&self, individual: &Iri) -> Result<Vec<(Iri, Iri)>> {
        let kb = self.kb();
        let x = kb
            .individual_id(individual)
            .ok_or_else(|| Error::UnknownIndividual(individual.to_string()))?;
        Ok((0..kb.roles().len())
            .flat_map(|r| {
                kb.successors(r, x)
                    .iter()
                    .map(move |&y| (kb.roles()[r].clone(), kb.individuals()[y].clone()))
            })
            .collect())
    }
}

//! Structural closed-world reasoner.
//!
//! Semantics are evaluated over the fixed universe Δ of the knowledge base
//! and over asserted role edges only: `¬C` is the complement in Δ, `∀r.C`
//! holds vacuously for individuals without `r`-successors, and no
//! domain/range or inverse-role inference takes place.

use std::collections::BTreeSet;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::expr::ClassExpression as CE;
use crate::hierarchy::ClassHierarchy;
use crate::iri::{self, Iri};
use crate::kb::KnowledgeBase;

pub struct Reasoner {
    kb: KnowledgeBase,
    hierarchy: ClassHierarchy,
    /// Per named class: members asserted into it or any subclass.
    extensions: Vec<BitSet>,
}

impl Reasoner {
    pub fn new(kb: KnowledgeBase) -> Self {
        let hierarchy = ClassHierarchy::classify(&kb);
        let n = kb.individuals().len();
        let extensions = (0..kb.classes().len())
            .map(|c| {
                BitSet::from_indices(
                    n,
                    hierarchy
                        .sub_closure(c)
                        .iter()
                        .flat_map(|sub| kb.asserted_members(sub).iter().copied()),
                )
            })
            .collect();
        Self {
            kb,
            hierarchy,
            extensions,
        }
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn hierarchy(&self) -> &ClassHierarchy {
        &self.hierarchy
    }

    pub fn universe_size(&self) -> usize {
        self.kb.individuals().len()
    }

    /// Retrieval as a bitset over individual ids.
    pub fn instances(&self, expr: &CE) -> Result<BitSet> {
        let n = self.universe_size();
        Ok(match expr {
            CE::Named(a) if a.as_str() == iri::OWL_THING => BitSet::full(n),
            CE::Named(a) if a.as_str() == iri::OWL_NOTHING => BitSet::empty(n),
            CE::Named(a) => self.extensions[self.class_id(a)?].clone(),
            CE::Top => BitSet::full(n),
            CE::Bottom => BitSet::empty(n),
            CE::Not(c) => self.instances(c)?.complement(),
            CE::And(cs) => {
                let mut acc = BitSet::full(n);
                for c in cs {
                    acc.intersect_with(&self.instances(c)?);
                    if acc.is_empty() {
                        // still validate the remaining vocabulary
                        for rest in cs {
                            self.validate(rest)?;
                        }
                        break;
                    }
                }
                acc
            }
            CE::Or(cs) => {
                let mut acc = BitSet::empty(n);
                for c in cs {
                    acc.union_with(&self.instances(c)?);
                }
                acc
            }
            CE::Some { role, filler } => self.count_restriction(role, filler, 1)?,
            CE::Min { n: k, role, filler } => self.count_restriction(role, filler, *k as usize)?,
            CE::Only { role, filler } => {
                let r = self.role_id(role)?;
                let inner = self.instances(filler)?;
                BitSet::from_indices(
                    n,
                    (0..n).filter(|&x| self.kb.successors(r, x).iter().all(|&y| inner.contains(y))),
                )
            }
        })
    }

    /// Retrieval as a sorted set of IRIs.
    pub fn instance_iris(&self, expr: &CE) -> Result<BTreeSet<Iri>> {
        Ok(self
            .instances(expr)?
            .iter()
            .map(|i| self.kb.individuals()[i].clone())
            .collect())
    }

    /// Point query by direct recursive model checking.
    pub fn check(&self, individual: &Iri, expr: &CE) -> Result<bool> {
        let x = self
            .kb
            .individual_id(individual)
            .ok_or_else(|| Error::UnknownIndividual(individual.to_string()))?;
        self.validate(expr)?;
        Ok(self.holds(x, expr))
    }

    /// Point query by individual id; vocabulary must already be valid.
    pub fn check_id(&self, x: usize, expr: &CE) -> Result<bool> {
        self.validate(expr)?;
        Ok(self.holds(x, expr))
    }

    /// Fails on the first class or role the knowledge base does not know.
    pub fn validate(&self, expr: &CE) -> Result<()> {
        for e in expr.subexpressions() {
            match e {
                CE::Named(a) if a.as_str() == iri::OWL_THING || a.as_str() == iri::OWL_NOTHING => {}
                CE::Named(a) => {
                    self.class_id(a)?;
                }
                CE::Some { role, .. } | CE::Only { role, .. } | CE::Min { role, .. } => {
                    self.role_id(role)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn holds(&self, x: usize, expr: &CE) -> bool {
        match expr {
            CE::Named(a) if a.as_str() == iri::OWL_THING => true,
            CE::Named(a) if a.as_str() == iri::OWL_NOTHING => false,
            CE::Named(a) => {
                let target = self.kb.class_id(a).expect("validated");
                self.kb
                    .asserted_types(x)
                    .iter()
                    .any(|&t| self.hierarchy.is_subclass_of(t, target))
            }
            CE::Top => true,
            CE::Bottom => false,
            CE::Not(c) => !self.holds(x, c),
            CE::And(cs) => cs.iter().all(|c| self.holds(x, c)),
            CE::Or(cs) => cs.iter().any(|c| self.holds(x, c)),
            CE::Some { role, filler } => {
                let r = self.kb.role_id(role).expect("validated");
                self.kb
                    .successors(r, x)
                    .iter()
                    .any(|&y| self.holds(y, filler))
            }
            CE::Only { role, filler } => {
                let r = self.kb.role_id(role).expect("validated");
                self.kb
                    .successors(r, x)
                    .iter()
                    .all(|&y| self.holds(y, filler))
            }
            CE::Min { n, role, filler } => {
                let r = self.kb.role_id(role).expect("validated");
                self.kb
                    .successors(r, x)
                    .iter()
                    .filter(|&&y| self.holds(y, filler))
                    .count()
                    >= *n as usize
            }
        }
    }

    fn count_restriction(&self, role: &Iri, filler: &CE, at_least: usize) -> Result<BitSet> {
        let r = self.role_id(role)?;
        let inner = self.instances(filler)?;
        let n = self.universe_size();
        let mut counts = vec![0usize; n];
        for y in inner.iter() {
            for &x in self.kb.predecessors(r, y) {
                counts[x] += 1;
            }
        }
        Ok(BitSet::from_indices(
            n,
            (0..n).filter(|&x| counts[x] >= at_least),
        ))
    }

    fn class_id(&self, class: &Iri) -> Result<usize> {
        self.kb
            .class_id(class)
            .ok_or_else(|| Error::UnknownClass(class.to_string()))
    }

    fn role_id(&self, role: &Iri) -> Result<usize> {
        self.kb
            .role_id(role)
            .ok_or_else(|| Error::UnknownRole(role.to_string()))
    }
}

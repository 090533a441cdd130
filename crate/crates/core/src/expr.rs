//! Class expressions of ALC extended with qualified minimum cardinality.

use std::cmp::Ordering;
use std::fmt;

use crate::iri::{self, Iri};
use crate::render::{render, Syntax};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ClassExpression {
    Named(Iri),
    Top,
    Bottom,
    Not(Box<ClassExpression>),
    And(Vec<ClassExpression>),
    Or(Vec<ClassExpression>),
    Some {
        role: Iri,
        filler: Box<ClassExpression>,
    },
    Only {
        role: Iri,
        filler: Box<ClassExpression>,
    },
    /// `≥ n role.filler`, `n ≥ 1`.
    Min {
        n: u32,
        role: Iri,
        filler: Box<ClassExpression>,
    },
}

use ClassExpression as CE;

impl ClassExpression {
    pub fn named(iri: Iri) -> Self {
        CE::Named(iri)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(expr: ClassExpression) -> Self {
        CE::Not(Box::new(expr))
    }

    pub fn and(operands: impl IntoIterator<Item = ClassExpression>) -> Self {
        CE::And(operands.into_iter().collect())
    }

    pub fn or(operands: impl IntoIterator<Item = ClassExpression>) -> Self {
        CE::Or(operands.into_iter().collect())
    }

    pub fn some(role: Iri, filler: ClassExpression) -> Self {
        CE::Some {
            role,
            filler: Box::new(filler),
        }
    }

    pub fn only(role: Iri, filler: ClassExpression) -> Self {
        CE::Only {
            role,
            filler: Box::new(filler),
        }
    }

    /// # Panics
    /// If `n == 0`.
    pub fn min(n: u32, role: Iri, filler: ClassExpression) -> Self {
        assert!(n >= 1, "cardinality bound must be positive");
        CE::Min {
            n,
            role,
            filler: Box::new(filler),
        }
    }

    /// Symbol count: names, roles, ⊤/⊥, quantifiers, negations, and k−1
    /// connectives for a k-ary conjunction or disjunction.
    pub fn length(&self) -> usize {
        match self {
            CE::Named(_) | CE::Top | CE::Bottom => 1,
            CE::Not(c) => 1 + c.length(),
            CE::And(cs) | CE::Or(cs) => {
                cs.iter().map(CE::length).sum::<usize>() + cs.len().saturating_sub(1)
            }
            CE::Some { filler, .. } | CE::Only { filler, .. } | CE::Min { filler, .. } => {
                2 + filler.length()
            }
        }
    }

    /// Negation normal form with flattened, deduplicated, canonically
    /// ordered conjunctions and disjunctions.
    ///
    /// Besides pushing negation inward, the only rewrites are the
    /// ⊤/⊥ absorption laws for ⊓ and ⊔, `¬⊤ = ⊥`, `¬⊥ = ⊤` and
    /// `≥1 r.C = ∃r.C`. `owl:Thing`/`owl:Nothing` become ⊤/⊥.
    pub fn normalize(&self) -> ClassExpression {
        nnf(self, false)
    }

    pub fn is_normalized(&self) -> bool {
        *self == self.normalize()
    }

    /// Canonical total order: by length, then by Manchester rendering.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.length()
            .cmp(&other.length())
            .then_with(|| render(self, Syntax::Manchester).cmp(&render(other, Syntax::Manchester)))
    }

    /// Every sub-expression in pre-order, including `self`.
    pub fn subexpressions(&self) -> Vec<&ClassExpression> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            out.push(e);
            match e {
                CE::Not(c) => stack.push(c),
                CE::And(cs) | CE::Or(cs) => stack.extend(cs.iter().rev()),
                CE::Some { filler, .. } | CE::Only { filler, .. } | CE::Min { filler, .. } => {
                    stack.push(filler)
                }
                _ => {}
            }
        }
        out
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, CE::Named(_) | CE::Top | CE::Bottom)
    }
}

impl fmt::Display for ClassExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, Syntax::Manchester))
    }
}

fn nnf(e: &CE, negated: bool) -> CE {
    match e {
        CE::Named(a) if a.as_str() == iri::OWL_THING => nnf(&CE::Top, negated),
        CE::Named(a) if a.as_str() == iri::OWL_NOTHING => nnf(&CE::Bottom, negated),
        CE::Named(_) if negated => CE::not(e.clone()),
        CE::Named(_) => e.clone(),
        CE::Top if negated => CE::Bottom,
        CE::Top => CE::Top,
        CE::Bottom if negated => CE::Top,
        CE::Bottom => CE::Bottom,
        CE::Not(inner) => nnf(inner, !negated),
        CE::And(cs) if negated => make_or(cs.iter().map(|c| nnf(c, true))),
        CE::And(cs) => make_and(cs.iter().map(|c| nnf(c, false))),
        CE::Or(cs) if negated => make_and(cs.iter().map(|c| nnf(c, true))),
        CE::Or(cs) => make_or(cs.iter().map(|c| nnf(c, false))),
        CE::Some { role, filler } if negated => CE::only(role.clone(), nnf(filler, true)),
        CE::Some { role, filler } => CE::some(role.clone(), nnf(filler, false)),
        CE::Only { role, filler } if negated => CE::some(role.clone(), nnf(filler, true)),
        CE::Only { role, filler } => CE::only(role.clone(), nnf(filler, false)),
        CE::Min { n: 1, role, filler } => nnf(&CE::some(role.clone(), (**filler).clone()), negated),
        CE::Min { n, role, filler } => {
            let inner = CE::min(*n, role.clone(), nnf(filler, false));
            if negated {
                // No max-cardinality constructor: keep the complement.
                CE::not(inner)
            } else {
                inner
            }
        }
    }
}

fn make_and(operands: impl Iterator<Item = CE>) -> CE {
    let mut flat = Vec::new();
    for op in operands {
        match op {
            CE::Top => {}
            CE::Bottom => return CE::Bottom,
            CE::And(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    finish(flat, CE::Top, CE::And)
}

fn make_or(operands: impl Iterator<Item = CE>) -> CE {
    let mut flat = Vec::new();
    for op in operands {
        match op {
            CE::Bottom => {}
            CE::Top => return CE::Top,
            CE::Or(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    finish(flat, CE::Bottom, CE::Or)
}

fn finish(mut flat: Vec<CE>, empty: CE, build: fn(Vec<CE>) -> CE) -> CE {
    sort_canonical(&mut flat);
    flat.dedup();
    match flat.len() {
        0 => empty,
        1 => flat.pop().expect("one operand"),
        _ => build(flat),
    }
}

pub(crate) fn sort_canonical(items: &mut [CE]) {
    items.sort_by_cached_key(|e| (e.length(), render(e, Syntax::Manchester)));
}

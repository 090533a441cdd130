//! Length-bounded downward refinement operator.
//!
//! Works on normalized expressions and only ever specializes: under the
//! closed-world reasoner every refinement retrieves a subset of what its
//! parent retrieves. Negation is introduced on leaf classes only, unions
//! only directly below ⊤, and fresh quantifiers start with filler ⊤.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{sort_canonical, ClassExpression as CE};
use crate::hierarchy::ClassHierarchy;
use crate::kb::KnowledgeBase;
use crate::reasoner::Reasoner;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefinementConfig {
    pub max_length: usize,
    pub use_negation: bool,
    pub use_universal: bool,
    pub use_cardinality: bool,
    pub max_cardinality_bound: u32,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            max_length: 11,
            use_negation: true,
            use_universal: true,
            use_cardinality: false,
            max_cardinality_bound: 3,
        }
    }
}

impl RefinementConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_length == 0 {
            return Err(Error::InvalidConfig("max_length must be at least 1".into()));
        }
        if self.max_cardinality_bound == 0 {
            return Err(Error::InvalidConfig(
                "max_cardinality_bound must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

pub struct Refiner<'a> {
    hierarchy: &'a ClassHierarchy,
    config: RefinementConfig,
    /// ρ(⊤) at the configured maximum length.
    top: Vec<CE>,
}

impl<'a> Refiner<'a> {
    pub fn new(
        kb: &KnowledgeBase,
        hierarchy: &'a ClassHierarchy,
        config: RefinementConfig,
    ) -> Self {
        let named = |id: usize| CE::Named(hierarchy.class(id).clone());
        let mut top = Vec::new();
        let roots = hierarchy.root_ids();
        top.extend(roots.iter().map(|&c| named(c)));
        if config.use_negation {
            top.extend(hierarchy.leaf_ids().iter().map(|&c| CE::not(named(c))));
        }
        for role in kb.roles() {
            top.push(CE::some(role.clone(), CE::Top));
            if config.use_universal {
                top.push(CE::only(role.clone(), CE::Top));
            }
        }
        for (i, &a) in roots.iter().enumerate() {
            for &b in &roots[i + 1..] {
                top.push(CE::or([named(a), named(b)]));
            }
        }
        let mut top: Vec<CE> = top
            .into_iter()
            .map(|e| e.normalize())
            .filter(|e| e.length() <= config.max_length)
            .collect();
        sort_canonical(&mut top);
        top.dedup();
        Self {
            hierarchy,
            config,
            top,
        }
    }

    pub fn config(&self) -> &RefinementConfig {
        &self.config
    }

    /// ρ(expr) bounded by the configured maximum length.
    pub fn refine(&self, expr: &CE) -> Vec<CE> {
        self.refine_within(expr, self.config.max_length)
    }

    /// ρ(expr) restricted to results of length ≤ `budget` (capped by the
    /// configured maximum). Normalized, canonically ordered, duplicate-free.
    pub fn refine_within(&self, expr: &CE, budget: usize) -> Vec<CE> {
        let budget = budget.min(self.config.max_length);
        let me = expr.normalize();
        let mut out: Vec<CE> = self
            .rho(&me, budget)
            .into_iter()
            .map(|e| e.normalize())
            .filter(|e| e.length() <= budget && *e != me)
            .collect();
        sort_canonical(&mut out);
        out.dedup();
        out
    }

    fn top_within(&self, budget: usize) -> impl Iterator<Item = &CE> {
        self.top.iter().filter(move |e| e.length() <= budget)
    }

    /// `e ⊓ t` for every `t ∈ ρ(⊤)` that fits.
    fn conjoin(&self, e: &CE, budget: usize, out: &mut Vec<CE>) {
        let used = e.length() + 1;
        if used < budget {
            out.extend(
                self.top_within(budget - used)
                    .map(|t| CE::and([e.clone(), t.clone()])),
            );
        }
    }

    fn rho(&self, e: &CE, budget: usize) -> Vec<CE> {
        let mut out = Vec::new();
        let h = self.hierarchy;
        match e {
            CE::Top => out.extend(self.top_within(budget).cloned()),
            CE::Bottom => {}
            CE::Named(a) => {
                if let Ok(id) = h.id_of(a) {
                    out.extend(
                        h.direct_sub_ids(id)
                            .iter()
                            .map(|&s| CE::Named(h.class(s).clone())),
                    );
                }
                self.conjoin(e, budget, &mut out);
            }
            CE::Not(inner) => {
                match &**inner {
                    CE::Named(a) => {
                        if let Ok(id) = h.id_of(a) {
                            out.extend(
                                h.direct_super_ids(id)
                                    .iter()
                                    .map(|&s| CE::not(CE::Named(h.class(s).clone()))),
                            );
                        }
                    }
                    // ≥(n-1) r.C ⊇ ≥n r.C, so its complement is smaller.
                    CE::Min { n, role, filler } if *n >= 2 => {
                        out.push(CE::not(CE::min(n - 1, role.clone(), (**filler).clone())));
                    }
                    _ => {}
                }
                self.conjoin(e, budget, &mut out);
            }
            CE::Some { role, filler } => {
                let inner_budget = budget.saturating_sub(2);
                out.extend(
                    self.rho(filler, inner_budget)
                        .into_iter()
                        .map(|f| CE::some(role.clone(), f)),
                );
                if self.config.use_cardinality && self.config.max_cardinality_bound >= 2 {
                    out.push(CE::min(2, role.clone(), (**filler).clone()));
                }
                self.conjoin(e, budget, &mut out);
            }
            CE::Only { role, filler } => {
                out.extend(
                    self.rho(filler, budget.saturating_sub(2))
                        .into_iter()
                        .map(|f| CE::only(role.clone(), f)),
                );
            }
            CE::Min { n, role, filler } => {
                out.extend(
                    self.rho(filler, budget.saturating_sub(2))
                        .into_iter()
                        .map(|f| CE::min(*n, role.clone(), f)),
                );
                if *n < self.config.max_cardinality_bound {
                    out.push(CE::min(n + 1, role.clone(), (**filler).clone()));
                }
            }
            CE::And(cs) | CE::Or(cs) => {
                let total = e.length();
                let rebuild = |ops: Vec<CE>| {
                    if matches!(e, CE::And(_)) {
                        CE::And(ops)
                    } else {
                        CE::Or(ops)
                    }
                };
                for (i, c) in cs.iter().enumerate() {
                    let room = budget.saturating_sub(total - c.length());
                    for refined in self.rho(c, room) {
                        let mut ops = cs.clone();
                        ops[i] = refined;
                        out.push(rebuild(ops));
                    }
                }
                if matches!(e, CE::Or(_)) {
                    for i in 0..cs.len() {
                        let mut ops = cs.clone();
                        ops.remove(i);
                        out.push(rebuild(ops));
                    }
                }
            }
        }
        out
    }
}

/// Whether breadth-first refinement from ⊤ reaches, within `max_depth`
/// steps, an expression retrieving exactly what `target` retrieves.
pub fn refinement_chain_exists(
    reasoner: &Reasoner,
    config: &RefinementConfig,
    target: &CE,
    max_depth: usize,
) -> Result<bool> {
    let goal = reasoner.instances(target)?;
    let refiner = Refiner::new(reasoner.kb(), reasoner.hierarchy(), config.clone());
    let mut seen = HashSet::from([CE::Top]);
    let mut queue = VecDeque::from([(CE::Top, 0usize)]);
    while let Some((expr, depth)) = queue.pop_front() {
        if reasoner.instances(&expr)? == goal {
            return Ok(true);
        }
        if depth == max_depth {
            continue;
        }
        for child in refiner.refine(&expr) {
            if seen.insert(child.clone()) {
                queue.push_back((child, depth + 1));
            }
        }
    }
    Ok(false)
}

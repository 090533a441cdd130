//! Named-class hierarchy: reflexive-transitive closure of the told
//! `SubClassOf` axioms and its transitive reduction.
//!
//! Subclass cycles are not errors; their members are treated as
//! equivalent and reported through [`ClassHierarchy::cycles`]. `owl:Thing`
//! is the implicit root and is addressed through [`Iri`]-level accessors.

use std::collections::BTreeSet;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::iri::{self, Iri};
use crate::kb::KnowledgeBase;

#[derive(Clone, Debug)]
pub struct ClassHierarchy {
    classes: Vec<Iri>,
    supers: Vec<BitSet>,
    subs: Vec<BitSet>,
    direct_supers: Vec<Vec<usize>>,
    direct_subs: Vec<Vec<usize>>,
    roots: Vec<usize>,
    leaves: Vec<usize>,
    cycles: Vec<Vec<Iri>>,
    thing: Iri,
}

impl ClassHierarchy {
    pub fn classify(kb: &KnowledgeBase) -> Self {
        let n = kb.classes().len();
        let mut supers = Vec::with_capacity(n);
        for start in 0..n {
            let mut seen = BitSet::empty(n);
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(c) = stack.pop() {
                for &p in kb.told_superclasses(c) {
                    if !seen.contains(p) {
                        seen.insert(p);
                        stack.push(p);
                    }
                }
            }
            supers.push(seen);
        }
        let mut subs = vec![BitSet::empty(n); n];
        for (c, sup) in supers.iter().enumerate() {
            for p in sup.iter() {
                subs[p].insert(c);
            }
        }

        let strict = |c: usize, rel: &[BitSet], inverse: &[BitSet]| -> BitSet {
            let mut s = rel[c].clone();
            s.difference_with(&inverse[c]);
            s
        };

        let mut cycles = Vec::new();
        let mut in_cycle = BitSet::empty(n);
        for c in 0..n {
            let mut equiv = supers[c].clone();
            equiv.intersect_with(&subs[c]);
            if equiv.count() > 1 && !in_cycle.contains(c) {
                cycles.push(equiv.iter().map(|i| kb.classes()[i].clone()).collect());
                in_cycle.union_with(&equiv);
            }
        }

        let mut direct_supers = vec![Vec::new(); n];
        for (c, slot) in direct_supers.iter_mut().enumerate() {
            let above = strict(c, &supers, &subs);
            for s in above.iter() {
                let shadowed = above
                    .iter()
                    .any(|t| t != s && supers[t].contains(s) && !supers[s].contains(t));
                if !shadowed {
                    slot.push(s);
                }
            }
        }
        let mut direct_subs = vec![Vec::new(); n];
        for (c, ds) in direct_supers.iter().enumerate() {
            for &s in ds {
                direct_subs[s].push(c);
            }
        }
        let roots = (0..n).filter(|&c| direct_supers[c].is_empty()).collect();
        let leaves = (0..n)
            .filter(|&c| strict(c, &subs, &supers).is_empty())
            .collect();

        Self {
            classes: kb.classes().to_vec(),
            supers,
            subs,
            direct_supers,
            direct_subs,
            roots,
            leaves,
            cycles,
            thing: Iri::new(iri::OWL_THING).expect("valid IRI"),
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class(&self, id: usize) -> &Iri {
        &self.classes[id]
    }

    /// Reflexive-transitive superclasses (named only).
    pub fn super_closure(&self, id: usize) -> &BitSet {
        &self.supers[id]
    }

    /// Reflexive-transitive subclasses.
    pub fn sub_closure(&self, id: usize) -> &BitSet {
        &self.subs[id]
    }

    pub fn direct_super_ids(&self, id: usize) -> &[usize] {
        &self.direct_supers[id]
    }

    pub fn direct_sub_ids(&self, id: usize) -> &[usize] {
        &self.direct_subs[id]
    }

    /// Classes directly below ⊤.
    pub fn root_ids(&self) -> &[usize] {
        &self.roots
    }

    /// Classes without a strict subclass.
    pub fn leaf_ids(&self) -> &[usize] {
        &self.leaves
    }

    /// Strict superclasses that are not equivalent to `id`.
    pub fn strict_super_ids(&self, id: usize) -> Vec<usize> {
        self.supers[id]
            .iter()
            .filter(|&s| !self.subs[id].contains(s))
            .collect()
    }

    pub fn strict_sub_ids(&self, id: usize) -> Vec<usize> {
        self.subs[id]
            .iter()
            .filter(|&s| !self.supers[id].contains(s))
            .collect()
    }

    pub fn is_subclass_of(&self, sub: usize, sup: usize) -> bool {
        self.supers[sub].contains(sup)
    }

    /// Equivalence groups found while collapsing subclass cycles.
    pub fn cycles(&self) -> &[Vec<Iri>] {
        &self.cycles
    }

    pub fn id_of(&self, class: &Iri) -> Result<usize> {
        self.classes
            .binary_search(class)
            .map_err(|_| Error::UnknownClass(class.to_string()))
    }

    fn is_thing(&self, class: &Iri) -> bool {
        class.as_str() == iri::OWL_THING
    }

    fn iris(&self, ids: impl IntoIterator<Item = usize>) -> BTreeSet<Iri> {
        ids.into_iter().map(|i| self.classes[i].clone()).collect()
    }

    /// All superclasses including the class itself and `owl:Thing`.
    pub fn superclasses(&self, class: &Iri) -> Result<BTreeSet<Iri>> {
        if self.is_thing(class) {
            return Ok(BTreeSet::from([self.thing.clone()]));
        }
        let mut out = self.iris(self.supers[self.id_of(class)?].iter());
        out.insert(self.thing.clone());
        Ok(out)
    }

    /// All subclasses including the class itself.
    pub fn subclasses(&self, class: &Iri) -> Result<BTreeSet<Iri>> {
        if self.is_thing(class) {
            let mut out = self.iris(0..self.len());
            out.insert(self.thing.clone());
            return Ok(out);
        }
        Ok(self.iris(self.subs[self.id_of(class)?].iter()))
    }

    pub fn direct_subclasses(&self, class: &Iri) -> Result<BTreeSet<Iri>> {
        if self.is_thing(class) {
            return Ok(self.iris(self.roots.iter().copied()));
        }
        Ok(self.iris(self.direct_subs[self.id_of(class)?].iter().copied()))
    }

    pub fn direct_superclasses(&self, class: &Iri) -> Result<BTreeSet<Iri>> {
        if self.is_thing(class) {
            return Ok(BTreeSet::new());
        }
        let id = self.id_of(class)?;
        if self.direct_supers[id].is_empty() {
            return Ok(BTreeSet::from([self.thing.clone()]));
        }
        Ok(self.iris(self.direct_supers[id].iter().copied()))
    }
}

//! Exhaustive search over every expression up to a given length, done on
//! retrieval sets rather than syntax: for each length it keeps the set of
//! extensions some expression of exactly that length has. The length
//! measure counts 1 per atom, connective and quantifier (so ∃r.C is
//! 2 + |C|, and an n-ary ⊓ of k operands adds k − 1).

use std::collections::BTreeSet;

use num_rational::Ratio;

use crate::triple_oracle::TripleOracle;

/// Retrieval sets as bitmasks over the oracle's individuals.
pub struct Enumerator {
    individuals: Vec<String>,
    atoms: Vec<u128>,
    /// Per role, the successor masks of every individual.
    roles: Vec<Vec<u128>>,
    with_cardinality: Option<u32>,
}

impl Enumerator {
    /// `with_cardinality = Some(k)` also enumerates ≥n r.C for 2 ≤ n ≤ k.
    pub fn new(oracle: &TripleOracle, with_cardinality: Option<u32>) -> Self {
        let individuals: Vec<String> = oracle.universe.iter().cloned().collect();
        assert!(individuals.len() <= 128, "bitmask universe");
        let mask_of = |pred: &dyn Fn(&str) -> bool| {
            individuals
                .iter()
                .enumerate()
                .filter(|(_, x)| pred(x))
                .fold(0u128, |m, (i, _)| m | 1 << i)
        };
        let atoms = oracle
            .classes
            .iter()
            .map(|c| mask_of(&|x| oracle.has_type(x, c)))
            .collect();
        let roles = oracle
            .roles
            .iter()
            .map(|r| {
                individuals
                    .iter()
                    .map(|x| {
                        let succ: BTreeSet<&String> = oracle.successors(x, r).collect();
                        mask_of(&|y| succ.iter().any(|s| s.as_str() == y))
                    })
                    .collect()
            })
            .collect();
        Self {
            individuals,
            atoms,
            roles,
            with_cardinality,
        }
    }

    pub fn individuals(&self) -> &[String] {
        &self.individuals
    }

    fn full(&self) -> u128 {
        if self.individuals.len() == 128 {
            u128::MAX
        } else {
            (1u128 << self.individuals.len()) - 1
        }
    }

    /// `by_length[l]` holds the extensions of expressions of length exactly `l`.
    pub fn extensions(&self, max_length: usize) -> Vec<BTreeSet<u128>> {
        let full = self.full();
        let mut by_length: Vec<BTreeSet<u128>> = vec![BTreeSet::new(); max_length + 1];
        if max_length == 0 {
            return by_length;
        }
        by_length[1].insert(full);
        by_length[1].insert(0);
        by_length[1].extend(self.atoms.iter().copied());
        for len in 2..=max_length {
            let mut next = BTreeSet::new();
            for &m in &by_length[len - 1] {
                next.insert(full & !m);
            }
            // binary ⊓/⊔ covers n-ary ones: k operands cost k − 1 connectives
            for a in 1..len - 1 {
                let b = len - 1 - a;
                for &x in &by_length[a] {
                    for &y in &by_length[b] {
                        next.insert(x & y);
                        next.insert(x | y);
                    }
                }
            }
            if len >= 3 {
                for &f in &by_length[len - 2] {
                    for succ in &self.roles {
                        let mut some = 0u128;
                        let mut only = 0u128;
                        for (i, s) in succ.iter().enumerate() {
                            if s & f != 0 {
                                some |= 1 << i;
                            }
                            if s & !f == 0 {
                                only |= 1 << i;
                            }
                        }
                        next.insert(some);
                        next.insert(only);
                        if let Some(k) = self.with_cardinality {
                            for n in 2..=k {
                                let mut min = 0u128;
                                for (i, s) in succ.iter().enumerate() {
                                    if (s & f).count_ones() >= n {
                                        min |= 1 << i;
                                    }
                                }
                                next.insert(min);
                            }
                        }
                    }
                }
            }
            by_length[len] = next;
        }
        by_length
    }

    /// Best F1 over every expression of length ≤ `max_length`.
    pub fn best_f1(
        &self,
        positives: &[String],
        negatives: &[String],
        max_length: usize,
    ) -> Ratio<u64> {
        let mask = |xs: &[String]| {
            xs.iter().fold(0u128, |m, x| {
                let i = self
                    .individuals
                    .iter()
                    .position(|y| y == x)
                    .expect("known individual");
                m | 1 << i
            })
        };
        let (pos, neg) = (mask(positives), mask(negatives));
        let p = pos.count_ones() as u64;
        self.extensions(max_length)
            .iter()
            .flatten()
            .map(|&m| {
                let tp = (m & pos).count_ones() as u64;
                let fp = (m & neg).count_ones() as u64;
                // F1 = 2tp / (2tp + fp + fn)
                let denom = 2 * tp + fp + (p - tp);
                if denom == 0 {
                    Ratio::from_integer(0)
                } else {
                    Ratio::new(2 * tp, denom)
                }
            })
            .max()
            .unwrap_or_else(|| Ratio::from_integer(0))
    }
}

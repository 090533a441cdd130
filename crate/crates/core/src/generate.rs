//! Seeded random class expressions, for fuzzing and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::expr::ClassExpression as CE;
use crate::iri::Iri;
use crate::kb::KnowledgeBase;

/// Random expression over the vocabulary of `kb` with `length() ≤ max_length`.
/// The result is not normalized.
pub fn random_expression(rng: &mut impl Rng, kb: &KnowledgeBase, max_length: usize) -> CE {
    grow(rng, kb.classes(), kb.roles(), max_length.max(1))
}

fn atom(rng: &mut impl Rng, classes: &[Iri]) -> CE {
    match (rng.gen_range(0..10), classes.choose(rng)) {
        (0, _) => CE::Top,
        (1, _) => CE::Bottom,
        (_, Some(c)) => CE::Named(c.clone()),
        (_, None) => CE::Top,
    }
}

fn grow(rng: &mut impl Rng, classes: &[Iri], roles: &[Iri], budget: usize) -> CE {
    let mut kinds = vec![0u8, 0];
    if budget >= 2 {
        kinds.push(1);
    }
    if budget >= 3 {
        kinds.extend([2, 3]);
        if !roles.is_empty() {
            kinds.extend([4, 5, 6]);
        }
    }
    match *kinds.choose(rng).expect("atom is always possible") {
        0 => atom(rng, classes),
        1 => CE::not(grow(rng, classes, roles, budget - 1)),
        k @ (2 | 3) => {
            let left = rng.gen_range(1..=budget - 2);
            let a = grow(rng, classes, roles, left);
            let b = grow(rng, classes, roles, budget - 1 - a.length());
            if k == 2 {
                CE::And(vec![a, b])
            } else {
                CE::Or(vec![a, b])
            }
        }
        k => {
            let role = roles.choose(rng).expect("non-empty").clone();
            let filler = grow(rng, classes, roles, budget - 2);
            match k {
                4 => CE::some(role, filler),
                5 => CE::only(role, filler),
                _ => CE::min(rng.gen_range(1..=3), role, filler),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::FAMILY_NT;
    use crate::ntriples::parse_ntriples;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lengths_are_bounded_and_varied() {
        let kb = KnowledgeBase::from_triples(&parse_ntriples(FAMILY_NT).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..500 {
            let e = random_expression(&mut rng, &kb, 7);
            assert!(e.length() <= 7);
            seen.insert(e.length());
        }
        assert_eq!(
            seen.into_iter().collect::<Vec<_>>(),
            (1..=7).collect::<Vec<_>>()
        );
    }
}

//! Genetic-programming learner over expression trees.
//!
//! The population is seeded from the neighbourhood of positive examples,
//! then evolved with tournament selection, subtree crossover, a handful of
//! hierarchy-aware mutations and elitism. Fitness is F1 minus a small
//! length penalty.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::RetrievalBackend;
use crate::error::{Error, Result};
use crate::expr::ClassExpression as CE;
use crate::iri::Iri;
use crate::problem::{to_f64, Coverage, LearningProblem, QualityFunction};
use crate::render::{render, Syntax};
use crate::search::Hypothesis;

pub const PARSIMONY: f64 = 0.005;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvoConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub max_tree_length: usize,
    pub elitism_count: usize,
    pub random_seed: u64,
    /// End the run as soon as some individual reaches F1 = 1.
    pub stop_on_perfect: bool,
    /// Checked between generations; a run cut short this way is no
    /// longer reproducible from the seed alone.
    pub max_runtime_seconds: f64,
}

impl Default for EvoConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 50,
            tournament_size: 7,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            max_tree_length: 11,
            elitism_count: 1,
            random_seed: 0,
            stop_on_perfect: true,
            max_runtime_seconds: 60.0,
        }
    }
}

impl EvoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover_rate must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate must lie in [0, 1]");
        }
        if self.population_size == 0 {
            return bad("population_size must be at least 1");
        }
        if self.elitism_count >= self.population_size {
            return bad("elitism_count must be smaller than population_size");
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be at least 1");
        }
        if self.max_tree_length == 0 {
            return bad("max_tree_length must be at least 1");
        }
        if self.max_runtime_seconds.is_nan() || self.max_runtime_seconds < 0.0 {
            return bad("max_runtime_seconds must be non-negative");
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EvoOutcome {
    /// Best individual seen in any generation.
    pub best: Hypothesis,
    pub fitness: f64,
    /// Best-ever fitness after the initial population and after each
    /// generation.
    pub fitness_trace: Vec<f64>,
    /// Generation in which F1 = 1 was first seen (0 = initial population).
    pub perfect_at: Option<usize>,
    pub generations_run: usize,
    pub wall_time: Duration,
}

pub fn fitness(coverage: &Coverage, length: usize) -> f64 {
    to_f64(coverage.quality.f1()) - PARSIMONY * length as f64
}

/// Neighbourhood sampler around positive examples.
struct AtomSampler<'a> {
    backend: &'a dyn RetrievalBackend,
    positives: Vec<Iri>,
}

impl AtomSampler<'_> {
    fn class_atom(&self, types: &[Iri], rng: &mut ChaCha8Rng) -> CE {
        let t = types.choose(rng).expect("non-empty").clone();
        let h = self.backend.hierarchy();
        if rng.gen_bool(0.5) {
            if let Ok(id) = h.id_of(&t) {
                let supers = h.strict_super_ids(id);
                if let Some(&s) = supers.choose(rng) {
                    return CE::Named(h.class(s).clone());
                }
            }
        }
        CE::Named(t)
    }

    fn edge_atom(&self, edges: &[(Iri, Iri)], rng: &mut ChaCha8Rng) -> Result<CE> {
        let (role, y) = edges.choose(rng).expect("non-empty").clone();
        let filler = if rng.gen_bool(0.5) {
            CE::Top
        } else {
            match self.backend.asserted_types(&y)?.choose(rng) {
                Some(t) => CE::Named(t.clone()),
                None => CE::Top,
            }
        };
        Ok(CE::some(role, filler))
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<CE> {
        let x = self.positives.choose(rng).expect("positives are non-empty");
        let types = self.backend.asserted_types(x)?;
        let edges = self.backend.asserted_edges(x)?;
        let choice = rng.gen_range(0..3);
        let expr = match (choice, types.is_empty(), edges.is_empty()) {
            (_, true, true) => CE::Top,
            (0, false, _) | (_, false, true) => self.class_atom(&types, rng),
            (1, _, false) | (_, true, false) => self.edge_atom(&edges, rng)?,
            _ => {
                let a = self.class_atom(&types, rng);
                let b = self.edge_atom(&edges, rng)?;
                CE::and([a, b])
            }
        };
        Ok(expr.normalize())
    }
}

/// Seeds `population_size` expressions from the positives' neighbourhoods.
pub fn init_population(
    backend: &dyn RetrievalBackend,
    problem: &LearningProblem,
    config: &EvoConfig,
) -> Result<Vec<CE>> {
    config.validate()?;
    problem.validate_against(backend.knowledge_base())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.random_seed);
    let sampler = AtomSampler {
        backend,
        positives: problem.positives().iter().cloned().collect(),
    };
    (0..config.population_size)
        .map(|_| sampler.sample(&mut rng))
        .collect()
}

type Path = Vec<usize>;

fn children(e: &CE) -> Vec<&CE> {
    match e {
        CE::Not(c) => vec![c],
        CE::Some { filler, .. } | CE::Only { filler, .. } | CE::Min { filler, .. } => vec![filler],
        CE::And(cs) | CE::Or(cs) => cs.iter().collect(),
        _ => vec![],
    }
}

/// Pre-order paths of all subtrees satisfying `keep`.
fn paths_where(e: &CE, keep: &dyn Fn(&CE) -> bool) -> Vec<Path> {
    fn walk(e: &CE, here: &mut Path, keep: &dyn Fn(&CE) -> bool, out: &mut Vec<Path>) {
        if keep(e) {
            out.push(here.clone());
        }
        for (i, c) in children(e).into_iter().enumerate() {
            here.push(i);
            walk(c, here, keep, out);
            here.pop();
        }
    }
    let mut out = Vec::new();
    walk(e, &mut Vec::new(), keep, &mut out);
    out
}

fn at<'e>(e: &'e CE, path: &[usize]) -> &'e CE {
    path.iter().fold(e, |node, &i| children(node)[i])
}

fn replace(e: &CE, path: &[usize], with: CE) -> CE {
    let Some((&i, rest)) = path.split_first() else {
        return with;
    };
    match e {
        CE::Not(c) => CE::Not(Box::new(replace(c, rest, with))),
        CE::Some { role, filler } => CE::Some {
            role: role.clone(),
            filler: Box::new(replace(filler, rest, with)),
        },
        CE::Only { role, filler } => CE::Only {
            role: role.clone(),
            filler: Box::new(replace(filler, rest, with)),
        },
        CE::Min { n, role, filler } => CE::Min {
            n: *n,
            role: role.clone(),
            filler: Box::new(replace(filler, rest, with)),
        },
        CE::And(cs) | CE::Or(cs) => {
            let mut ops = cs.clone();
            ops[i] = replace(&cs[i], rest, with);
            if matches!(e, CE::And(_)) {
                CE::And(ops)
            } else {
                CE::Or(ops)
            }
        }
        _ => unreachable!("path leads below a leaf"),
    }
}

struct Evolution<'a> {
    backend: &'a dyn RetrievalBackend,
    problem: &'a LearningProblem,
    config: &'a EvoConfig,
    sampler: AtomSampler<'a>,
    rng: ChaCha8Rng,
    cache: HashMap<CE, Coverage>,
}

impl Evolution<'_> {
    fn coverage(&mut self, e: &CE) -> Result<Coverage> {
        if let Some(c) = self.cache.get(e) {
            return Ok(*c);
        }
        let c = self.backend.coverage(self.problem, e)?;
        self.cache.insert(e.clone(), c);
        Ok(c)
    }

    fn tournament(&mut self, scores: &[f64]) -> usize {
        let mut best = self.rng.gen_range(0..scores.len());
        for _ in 1..self.config.tournament_size {
            let other = self.rng.gen_range(0..scores.len());
            if scores[other] > scores[best] {
                best = other;
            }
        }
        best
    }

    fn fits(&self, e: CE, fallback: &CE) -> CE {
        let e = e.normalize();
        if e.length() <= self.config.max_tree_length {
            e
        } else {
            fallback.clone()
        }
    }

    fn crossover(&mut self, a: &CE, b: &CE) -> (CE, CE) {
        let pa = paths_where(a, &|_| true);
        let pb = paths_where(b, &|_| true);
        let pa = pa.choose(&mut self.rng).expect("root path");
        let pb = pb.choose(&mut self.rng).expect("root path");
        let ca = replace(a, pa, at(b, pb).clone());
        let cb = replace(b, pb, at(a, pa).clone());
        (self.fits(ca, a), self.fits(cb, b))
    }

    fn mutate(&mut self, e: &CE) -> Result<CE> {
        let named = paths_where(e, &|n| matches!(n, CE::Named(_)));
        let quantified = paths_where(e, &|n| matches!(n, CE::Some { .. } | CE::Only { .. }));
        let conjunctions = paths_where(e, &|n| matches!(n, CE::And(_)));
        let mut kinds = vec![2u8];
        if !named.is_empty() {
            kinds.push(0);
        }
        if !quantified.is_empty() {
            kinds.push(1);
        }
        if !conjunctions.is_empty() {
            kinds.push(3);
        }
        kinds.sort_unstable();
        let mutated = match *kinds
            .choose(&mut self.rng)
            .expect("graft is always possible")
        {
            0 => {
                let path = named.choose(&mut self.rng).expect("non-empty").clone();
                let CE::Named(a) = at(e, &path) else {
                    unreachable!()
                };
                match self.neighbour(a).choose(&mut self.rng) {
                    Some(b) => replace(e, &path, CE::Named(b.clone())),
                    None => e.clone(),
                }
            }
            1 => {
                let path = quantified.choose(&mut self.rng).expect("non-empty").clone();
                let toggled = match at(e, &path) {
                    CE::Some { role, filler } => CE::only(role.clone(), (**filler).clone()),
                    CE::Only { role, filler } => CE::some(role.clone(), (**filler).clone()),
                    _ => unreachable!(),
                };
                replace(e, &path, toggled)
            }
            2 => {
                let atom = self.sampler.sample(&mut self.rng)?;
                CE::and([e.clone(), atom])
            }
            _ => {
                let path = conjunctions
                    .choose(&mut self.rng)
                    .expect("non-empty")
                    .clone();
                let CE::And(ops) = at(e, &path) else {
                    unreachable!()
                };
                let mut ops = ops.clone();
                ops.remove(self.rng.gen_range(0..ops.len()));
                replace(e, &path, CE::and(ops))
            }
        };
        Ok(self.fits(mutated, e))
    }

    /// Siblings, direct subclasses and direct superclasses of `a`.
    fn neighbour(&self, a: &Iri) -> Vec<Iri> {
        let h = self.backend.hierarchy();
        let Ok(id) = h.id_of(a) else {
            return Vec::new();
        };
        let mut out: Vec<usize> = h.direct_sub_ids(id).to_vec();
        let supers = h.direct_super_ids(id);
        out.extend_from_slice(supers);
        let sibling_parents: Vec<usize> = if supers.is_empty() {
            h.root_ids().to_vec()
        } else {
            supers
                .iter()
                .flat_map(|&s| h.direct_sub_ids(s).iter().copied())
                .collect()
        };
        out.extend(sibling_parents.into_iter().filter(|&s| s != id));
        out.sort_unstable();
        out.dedup();
        out.into_iter().map(|c| h.class(c).clone()).collect()
    }
}

/// Ranking for "best": fitness, then shorter, then rendering.
fn better(a: (f64, &CE), b: (f64, &CE)) -> bool {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Equal => {
            (a.1.length(), render(a.1, Syntax::Manchester))
                < (b.1.length(), render(b.1, Syntax::Manchester))
        }
        o => o.is_gt(),
    }
}

pub fn evolve(
    backend: &dyn RetrievalBackend,
    problem: &LearningProblem,
    config: &EvoConfig,
) -> Result<EvoOutcome> {
    let started = Instant::now();
    let mut population = init_population(backend, problem, config)?;
    let mut evo = Evolution {
        backend,
        problem,
        config,
        sampler: AtomSampler {
            backend,
            positives: problem.positives().iter().cloned().collect(),
        },
        // Independent stream from the one that seeded the population.
        rng: ChaCha8Rng::seed_from_u64(config.random_seed ^ 0x9e37_79b9_7f4a_7c15),
        cache: HashMap::new(),
    };

    let mut best: Option<(f64, CE, Coverage)> = None;
    let mut trace = Vec::new();
    let mut perfect_at = None;
    let mut generation = 0;
    loop {
        let mut scores = Vec::with_capacity(population.len());
        for e in &population {
            let c = evo.coverage(e)?;
            let f = fitness(&c, e.length());
            scores.push(f);
            let improves = match &best {
                None => true,
                Some((bf, be, _)) => better((f, e), (*bf, be)),
            };
            if improves {
                best = Some((f, e.clone(), c));
            }
            if perfect_at.is_none() && c.quality.f1() == 1.into() {
                perfect_at = Some(generation);
            }
        }
        trace.push(best.as_ref().expect("population is non-empty").0);
        if generation == config.generations
            || (config.stop_on_perfect && perfect_at.is_some())
            || started.elapsed().as_secs_f64() >= config.max_runtime_seconds
        {
            break;
        }
        generation += 1;

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&i, &j| {
            if better((scores[i], &population[i]), (scores[j], &population[j])) {
                std::cmp::Ordering::Less
            } else if better((scores[j], &population[j]), (scores[i], &population[i])) {
                std::cmp::Ordering::Greater
            } else {
                i.cmp(&j)
            }
        });
        let mut next: Vec<CE> = order[..config.elitism_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < config.population_size {
            let a = population[evo.tournament(&scores)].clone();
            let b = population[evo.tournament(&scores)].clone();
            let (mut x, mut y) = if evo.rng.gen_bool(config.crossover_rate) {
                evo.crossover(&a, &b)
            } else {
                (a, b)
            };
            if evo.rng.gen_bool(config.mutation_rate) {
                x = evo.mutate(&x)?;
            }
            if evo.rng.gen_bool(config.mutation_rate) {
                y = evo.mutate(&y)?;
            }
            next.push(x);
            if next.len() < config.population_size {
                next.push(y);
            }
        }
        population = next;
    }

    let (f, expr, coverage) = best.expect("population is non-empty");
    Ok(EvoOutcome {
        best: Hypothesis::new(expr, coverage, QualityFunction::F1),
        fitness: f,
        fitness_trace: trace,
        perfect_at,
        generations_run: generation,
        wall_time: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{FAMILY_NS, FAMILY_NT, MARRIED_FEMALE_LP};
    use crate::kb::KnowledgeBase;
    use crate::ntriples::parse_ntriples;
    use crate::reasoner::Reasoner;

    fn family() -> Reasoner {
        Reasoner::new(KnowledgeBase::from_triples(&parse_ntriples(FAMILY_NT).unwrap()).unwrap())
    }

    fn fam(local: &str) -> Iri {
        Iri::new(format!("{FAMILY_NS}{local}")).unwrap()
    }

    #[test]
    fn seed_population_contains_both_atoms() {
        let r = family();
        let lp = LearningProblem::from_json(MARRIED_FEMALE_LP).unwrap();
        for seed in 0..10 {
            let cfg = EvoConfig {
                random_seed: seed,
                ..EvoConfig::default()
            };
            let pop = init_population(&r, &lp, &cfg).unwrap();
            assert_eq!(pop.len(), 100);
            assert!(pop.contains(&CE::Named(fam("Female"))));
            assert!(pop.contains(&CE::some(fam("married"), CE::Top)));
            assert!(pop.iter().all(|e| e.is_normalized()));
        }
    }

    #[test]
    fn bare_example_contributes_top() {
        let doc = "<http://x/a> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#NamedIndividual> .";
        let r = Reasoner::new(KnowledgeBase::from_triples(&parse_ntriples(doc).unwrap()).unwrap());
        let lp = LearningProblem::new([Iri::new("http://x/a").unwrap()], [], None).unwrap();
        let pop = init_population(&r, &lp, &EvoConfig::default()).unwrap();
        assert!(pop.iter().all(|e| *e == CE::Top));
    }

    #[test]
    fn deterministic_per_seed() {
        let r = family();
        let lp = LearningProblem::from_json(MARRIED_FEMALE_LP).unwrap();
        let cfg = EvoConfig {
            random_seed: 42,
            stop_on_perfect: false,
            generations: 10,
            ..EvoConfig::default()
        };
        let a = evolve(&r, &lp, &cfg).unwrap();
        let b = evolve(&r, &lp, &cfg).unwrap();
        assert_eq!(a.fitness_trace, b.fitness_trace);
        assert_eq!(a.best, b.best);
    }

    #[test]
    fn trace_is_monotone() {
        let r = family();
        let lp = LearningProblem::from_json(MARRIED_FEMALE_LP).unwrap();
        for seed in 0..5 {
            let cfg = EvoConfig {
                random_seed: seed,
                stop_on_perfect: false,
                generations: 15,
                ..EvoConfig::default()
            };
            let out = evolve(&r, &lp, &cfg).unwrap();
            assert_eq!(out.fitness_trace.len(), 16);
            assert!(out.fitness_trace.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn identical_atomic_population_is_stable() {
        let r = family();
        let lp = LearningProblem::new([fam("F10F172")], [fam("F10M171")], None).unwrap();
        let cfg = EvoConfig {
            mutation_rate: 0.0,
            population_size: 10,
            generations: 5,
            stop_on_perfect: false,
            ..EvoConfig::default()
        };
        let out = evolve(&r, &lp, &cfg).unwrap();
        assert!(out.fitness_trace.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn crossover_of_identical_leaves_is_identity() {
        let r = family();
        let lp = LearningProblem::from_json(MARRIED_FEMALE_LP).unwrap();
        let cfg = EvoConfig::default();
        let mut evo = Evolution {
            backend: &r,
            problem: &lp,
            config: &cfg,
            sampler: AtomSampler {
                backend: &r,
                positives: lp.positives().iter().cloned().collect(),
            },
            rng: ChaCha8Rng::seed_from_u64(1),
            cache: HashMap::new(),
        };
        let f = CE::Named(fam("Female"));
        for _ in 0..20 {
            assert_eq!(evo.crossover(&f, &f), (f.clone(), f.clone()));
        }
    }

    #[test]
    fn variation_respects_length_cap() {
        let r = family();
        let lp = LearningProblem::from_json(MARRIED_FEMALE_LP).unwrap();
        let cfg = EvoConfig {
            max_tree_length: 5,
            ..EvoConfig::default()
        };
        let mut evo = Evolution {
            backend: &r,
            problem: &lp,
            config: &cfg,
            sampler: AtomSampler {
                backend: &r,
                positives: lp.positives().iter().cloned().collect(),
            },
            rng: ChaCha8Rng::seed_from_u64(3),
            cache: HashMap::new(),
        };
        let e = CE::and([CE::Named(fam("Female")), CE::some(fam("married"), CE::Top)]).normalize();
        for _ in 0..200 {
            let (a, b) = evo.crossover(&e, &e);
            assert!(a.length() <= 5 && b.length() <= 5);
            let m = evo.mutate(&e).unwrap();
            assert!(m.length() <= 5 && m.is_normalized());
        }
    }

    #[test]
    fn config_validation() {
        for bad in [
            EvoConfig {
                crossover_rate: 1.5,
                ..EvoConfig::default()
            },
            EvoConfig {
                mutation_rate: -0.1,
                ..EvoConfig::default()
            },
            EvoConfig {
                elitism_count: 100,
                ..EvoConfig::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}

//! Refinement-based best-first search (CELOE-style, with an OCEL-style
//! scoring preset).
//!
//! Each expansion pops the highest-scoring node, raises its horizontal
//! expansion (the length budget for its refinements) by one, and adds every
//! refinement not seen before. Nodes stay in the open set until their
//! budget reaches the maximum hypothesis length.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::backend::RetrievalBackend;
use crate::error::{Error, Result};
use crate::expr::ClassExpression;
use crate::problem::{to_f64, Coverage, LearningProblem, QualityFunction, QualityResult};
use crate::refinement::{RefinementConfig, Refiner};
use crate::render::{render, Syntax};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    #[default]
    Celoe,
    Ocel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub preset: Preset,
    pub max_runtime_seconds: f64,
    pub max_iterations: usize,
    pub quality_threshold: f64,
    pub max_hypothesis_length: usize,
    pub start_bonus: f64,
    pub gain_bonus: f64,
    pub expansion_penalty: f64,
    pub refinement_penalty: f64,
    /// OCEL preset only.
    pub length_penalty: f64,
    pub random_seed: u64,
    pub quality_function: QualityFunction,
    /// Among equally good hypotheses, rank those retrieving fewer
    /// non-example individuals first, and keep searching past the quality
    /// threshold until such a tight hypothesis is found.
    pub prefer_specific: bool,
    pub top_k: usize,
    pub use_negation: bool,
    pub use_universal: bool,
    pub use_cardinality: bool,
    pub max_cardinality_bound: u32,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            preset: Preset::Celoe,
            max_runtime_seconds: 10.0,
            max_iterations: 10_000,
            quality_threshold: 1.0,
            max_hypothesis_length: 11,
            start_bonus: 0.1,
            gain_bonus: 0.3,
            expansion_penalty: 0.1,
            refinement_penalty: 0.0001,
            length_penalty: 0.02,
            random_seed: 0,
            quality_function: QualityFunction::F1,
            prefer_specific: true,
            top_k: 10,
            use_negation: true,
            use_universal: true,
            use_cardinality: false,
            max_cardinality_bound: 3,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        let penalties = [
            ("start_bonus", self.start_bonus),
            ("gain_bonus", self.gain_bonus),
            ("expansion_penalty", self.expansion_penalty),
            ("refinement_penalty", self.refinement_penalty),
            ("length_penalty", self.length_penalty),
            ("max_runtime_seconds", self.max_runtime_seconds),
        ];
        if let Some((name, _)) = penalties.iter().find(|(_, v)| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidConfig(format!("{name} must be non-negative")));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.top_k == 0 {
            return Err(Error::InvalidConfig("top_k must be at least 1".into()));
        }
        if self.quality_threshold.is_nan() {
            return Err(Error::InvalidConfig(
                "quality_threshold must be a number".into(),
            ));
        }
        self.refinement().validate()
    }

    pub fn refinement(&self) -> RefinementConfig {
        RefinementConfig {
            max_length: self.max_hypothesis_length,
            use_negation: self.use_negation,
            use_universal: self.use_universal,
            use_cardinality: self.use_cardinality,
            max_cardinality_bound: self.max_cardinality_bound,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchNode {
    pub expr: ClassExpression,
    pub rendering: String,
    pub length: usize,
    pub coverage: Coverage,
    /// Value of the configured quality function.
    pub quality: f64,
    pub accuracy: f64,
    pub parent_quality: Option<f64>,
    pub parent_accuracy: Option<f64>,
    pub heuristic: f64,
    pub horizontal_expansion: usize,
    pub refinement_count: usize,
    pub parent: Option<usize>,
    pub depth: usize,
}

/// Search-tree score of a node.
pub fn score_node(node: &SearchNode, config: &LearnerConfig) -> f64 {
    match config.preset {
        Preset::Celoe => {
            let gain = node.parent_quality.map_or(0.0, |p| node.quality - p);
            let mut h = node.quality + config.gain_bonus * gain
                - config.expansion_penalty * (node.horizontal_expansion - node.length) as f64
                - config.refinement_penalty * node.refinement_count as f64;
            if node.parent.is_none() {
                h += config.start_bonus;
            }
            h
        }
        Preset::Ocel => {
            let gain = node.parent_accuracy.map_or(0.0, |p| node.accuracy - p);
            node.accuracy - config.length_penalty * node.length as f64 + config.gain_bonus * gain
        }
    }
}

/// Order of the open list: best first. Ties go to the shorter, then the
/// lexicographically smaller rendering.
pub fn compare_nodes(a: &SearchNode, b: &SearchNode) -> Ordering {
    b.heuristic
        .total_cmp(&a.heuristic)
        .then(a.length.cmp(&b.length))
        .then_with(|| a.rendering.cmp(&b.rendering))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypothesis {
    #[serde(skip)]
    pub expr: ClassExpression,
    pub quality: QualityResult,
    pub score: f64,
    pub retrieved: u64,
    pub length: usize,
    pub dl: String,
    pub manchester: String,
}

impl Hypothesis {
    pub fn new(
        expr: ClassExpression,
        coverage: Coverage,
        quality_function: QualityFunction,
    ) -> Self {
        Self {
            dl: render(&expr, Syntax::Dl),
            manchester: render(&expr, Syntax::Manchester),
            length: expr.length(),
            score: quality_function.score(&coverage.quality),
            quality: coverage.quality,
            retrieved: coverage.retrieved,
            expr,
        }
    }

    pub fn f1(&self) -> f64 {
        to_f64(self.quality.f1())
    }

    pub fn accuracy(&self) -> f64 {
        to_f64(self.quality.accuracy())
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub nodes_expanded: usize,
    pub nodes_evaluated: usize,
    pub wall_time: Duration,
    /// Best quality after initialization and after every expansion.
    pub best_quality_trace: Vec<f64>,
    pub threshold_reached: bool,
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    /// Best first: quality desc, then (when preferring specific
    /// hypotheses) fewer non-example individuals, then length asc, then
    /// Manchester rendering.
    pub hypotheses: Vec<Hypothesis>,
    pub stats: SearchStats,
}

struct OpenKey {
    heuristic: f64,
    length: usize,
    rendering: String,
    id: usize,
}

impl Ord for OpenKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .heuristic
            .total_cmp(&self.heuristic)
            .then(self.length.cmp(&other.length))
            .then_with(|| self.rendering.cmp(&other.rendering))
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for OpenKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for OpenKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenKey {}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct BestKey {
    quality: std::cmp::Reverse<u64>,
    unlabeled: u64,
    length: usize,
    rendering: String,
    id: usize,
}

struct Search<'a> {
    backend: &'a dyn RetrievalBackend,
    problem: &'a LearningProblem,
    config: &'a LearnerConfig,
    nodes: Vec<SearchNode>,
    open: BTreeSet<OpenKey>,
    best: BTreeSet<BestKey>,
    seen: HashSet<String>,
}

impl Search<'_> {
    fn add_node(&mut self, expr: ClassExpression, parent: Option<usize>) -> Result<usize> {
        let coverage = self.backend.coverage(self.problem, &expr)?;
        let rendering = render(&expr, Syntax::Manchester);
        let length = expr.length();
        let (parent_quality, parent_accuracy, depth) = match parent {
            Some(p) => (
                Some(self.nodes[p].quality),
                Some(self.nodes[p].accuracy),
                self.nodes[p].depth + 1,
            ),
            None => (None, None, 0),
        };
        let mut node = SearchNode {
            quality: self.config.quality_function.score(&coverage.quality),
            accuracy: to_f64(coverage.quality.accuracy()),
            expr,
            rendering,
            length,
            coverage,
            parent_quality,
            parent_accuracy,
            heuristic: 0.0,
            horizontal_expansion: length,
            refinement_count: 0,
            parent,
            depth,
        };
        node.heuristic = score_node(&node, self.config);
        let id = self.nodes.len();
        self.seen.insert(node.rendering.clone());
        self.best.insert(BestKey {
            // Quality ordered through its bit pattern: valid for
            // non-negative finite floats.
            quality: std::cmp::Reverse(node.quality.to_bits()),
            unlabeled: if self.config.prefer_specific {
                node.coverage.unlabeled()
            } else {
                0
            },
            length,
            rendering: node.rendering.clone(),
            id,
        });
        if self.best.len() > self.config.top_k {
            self.best.pop_last();
        }
        self.open.insert(OpenKey {
            heuristic: node.heuristic,
            length,
            rendering: node.rendering.clone(),
            id,
        });
        self.nodes.push(node);
        Ok(id)
    }

    fn best_quality(&self) -> f64 {
        self.best
            .first()
            .map(|k| self.nodes[k.id].quality)
            .unwrap_or(0.0)
    }

    fn goal_reached(&self) -> bool {
        match self.best.first() {
            Some(k) => {
                self.nodes[k.id].quality >= self.config.quality_threshold
                    && (!self.config.prefer_specific || k.unlabeled == 0)
            }
            None => false,
        }
    }
}

/// Runs the search until the quality goal, the iteration cap or the time
/// limit is hit. The time limit is only checked between expansions.
pub fn learn(
    backend: &dyn RetrievalBackend,
    problem: &LearningProblem,
    config: &LearnerConfig,
) -> Result<LearnOutcome> {
    config.validate()?;
    problem.validate_against(backend.knowledge_base())?;
    let started = Instant::now();
    let deadline = Duration::from_secs_f64(config.max_runtime_seconds);
    let refiner = Refiner::new(
        backend.knowledge_base(),
        backend.hierarchy(),
        config.refinement(),
    );
    let mut search = Search {
        backend,
        problem,
        config,
        nodes: Vec::new(),
        open: BTreeSet::new(),
        best: BTreeSet::new(),
        seen: HashSet::new(),
    };
    let mut stats = SearchStats::default();
    search.add_node(ClassExpression::Top, None)?;
    stats.best_quality_trace.push(search.best_quality());

    while !search.goal_reached()
        && stats.nodes_expanded < config.max_iterations
        && started.elapsed() < deadline
    {
        let Some(key) = search.open.pop_first() else {
            break;
        };
        let id = key.id;
        stats.nodes_expanded += 1;
        search.nodes[id].horizontal_expansion += 1;
        let budget = search.nodes[id].horizontal_expansion;
        let expr = search.nodes[id].expr.clone();
        for child in refiner.refine_within(&expr, budget) {
            let rendering = render(&child, Syntax::Manchester);
            if search.seen.contains(&rendering) {
                continue;
            }
            search.add_node(child, Some(id))?;
            search.nodes[id].refinement_count += 1;
        }
        let node = &mut search.nodes[id];
        if node.horizontal_expansion < config.max_hypothesis_length {
            node.heuristic = score_node(node, config);
            search.open.insert(OpenKey {
                heuristic: node.heuristic,
                length: node.length,
                rendering: node.rendering.clone(),
                id,
            });
        }
        stats.best_quality_trace.push(search.best_quality());
    }

    stats.threshold_reached = search.goal_reached();
    stats.nodes_evaluated = search.nodes.len();
    stats.wall_time = started.elapsed();
    let hypotheses = search
        .best
        .iter()
        .map(|k| {
            let node = &search.nodes[k.id];
            Hypothesis::new(node.expr.clone(), node.coverage, config.quality_function)
        })
        .collect();
    Ok(LearnOutcome { hypotheses, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{FAMILY_NT, MARRIED_FEMALE_LP};
    use crate::kb::KnowledgeBase;
    use crate::ntriples::parse_ntriples;
    use crate::reasoner::Reasoner;

    fn family() -> Reasoner {
        Reasoner::new(KnowledgeBase::from_triples(&parse_ntriples(FAMILY_NT).unwrap()).unwrap())
    }

    fn node(
        quality: f64,
        parent: Option<f64>,
        length: usize,
        he: usize,
        refs: usize,
    ) -> SearchNode {
        SearchNode {
            expr: ClassExpression::Top,
            rendering: "Thing".into(),
            length,
            coverage: Coverage {
                quality: QualityResult::default(),
                retrieved: 0,
            },
            quality,
            accuracy: quality,
            parent_quality: parent,
            parent_accuracy: parent,
            heuristic: 0.0,
            horizontal_expansion: he,
            refinement_count: refs,
            parent: parent.map(|_| 0),
            depth: 0,
        }
    }

    #[test]
    fn root_gets_start_bonus() {
        let cfg = LearnerConfig::default();
        let h = score_node(&node(0.75, None, 1, 1, 0), &cfg);
        assert!((h - 0.85).abs() < 1e-12);
    }

    #[test]
    fn gain_bonus() {
        let cfg = LearnerConfig::default();
        let h = score_node(&node(0.75, Some(0.6), 3, 3, 0), &cfg);
        assert!((h - 0.795).abs() < 1e-12, "{h}");
    }

    #[test]
    fn expansion_and_refinement_penalties() {
        let cfg = LearnerConfig::default();
        let h = score_node(&node(0.5, Some(0.5), 3, 5, 10), &cfg);
        assert!((h - (0.5 - 0.2 - 0.001)).abs() < 1e-12);
    }

    #[test]
    fn ocel_score() {
        let cfg = LearnerConfig {
            preset: Preset::Ocel,
            ..LearnerConfig::default()
        };
        let h = score_node(&node(0.8, Some(0.6), 5, 5, 3), &cfg);
        assert!((h - (0.8 - 0.1 + 0.06)).abs() < 1e-12);
    }

    #[test]
    fn ties_break_on_length_then_rendering() {
        let mut a = node(0.5, None, 3, 3, 0);
        let mut b = node(0.5, None, 1, 1, 0);
        a.heuristic = 0.6;
        b.heuristic = 0.6;
        assert_eq!(compare_nodes(&b, &a), Ordering::Less);
        b.length = 3;
        a.rendering = "A".into();
        b.rendering = "B".into();
        assert_eq!(compare_nodes(&a, &b), Ordering::Less);
    }

    #[test]
    fn invalid_configs() {
        let bad = LearnerConfig {
            gain_bonus: -1.0,
            ..LearnerConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = LearnerConfig {
            max_iterations: 0,
            ..LearnerConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn everything_positive_returns_top_immediately() {
        let r = family();
        let lp = LearningProblem::new(r.kb().individuals().iter().cloned(), [], None).unwrap();
        let out = learn(&r, &lp, &LearnerConfig::default()).unwrap();
        assert_eq!(out.hypotheses[0].expr, ClassExpression::Top);
        assert_eq!(out.hypotheses[0].f1(), 1.0);
        assert_eq!(out.stats.nodes_expanded, 0);
    }

    #[test]
    fn unreachable_threshold_runs_exactly_max_iterations() {
        let r = family();
        let lp = LearningProblem::from_json(MARRIED_FEMALE_LP).unwrap();
        let cfg = LearnerConfig {
            quality_threshold: 2.0,
            max_iterations: 50,
            max_runtime_seconds: 60.0,
            ..LearnerConfig::default()
        };
        let out = learn(&r, &lp, &cfg).unwrap();
        assert_eq!(out.stats.nodes_expanded, 50);
        assert!(!out.stats.threshold_reached);
    }

    #[test]
    fn empty_vocabulary_yields_top() {
        let doc = "<http://x/a> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#NamedIndividual> .\n<http://x/b> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#NamedIndividual> .";
        let r = Reasoner::new(KnowledgeBase::from_triples(&parse_ntriples(doc).unwrap()).unwrap());
        let lp = LearningProblem::new(
            [crate::Iri::new("http://x/a").unwrap()],
            [crate::Iri::new("http://x/b").unwrap()],
            None,
        )
        .unwrap();
        let out = learn(&r, &lp, &LearnerConfig::default()).unwrap();
        assert_eq!(out.hypotheses.len(), 1);
        assert_eq!(out.hypotheses[0].expr, ClassExpression::Top);
        assert!((out.hypotheses[0].f1() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_example_is_an_error() {
        let r = family();
        let lp =
            LearningProblem::new([crate::Iri::new("http://x/nobody").unwrap()], [], None).unwrap();
        assert!(matches!(
            learn(&r, &lp, &LearnerConfig::default()),
            Err(Error::UnknownIndividual(_))
        ));
    }
}

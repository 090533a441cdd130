//! Loading a knowledge source, running a learner and shaping the report.
//! Shared by the CLI and the HTTP service so both emit the same JSON.

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use conceptlearn_core::evo::{evolve, EvoConfig};
use conceptlearn_core::kb::KbStatistics;
use conceptlearn_core::search::{learn, Hypothesis, LearnerConfig, Preset};
use conceptlearn_core::verbalize::{verbalize, LabelMap};
use conceptlearn_core::{
    ntriples, Error, KnowledgeBase, LearningProblem, Reasoner, RetrievalBackend,
};
use conceptlearn_sparql::{compile_with, CompileOptions, EndpointBackend, SparqlClient};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Bad flags, request fields or learner settings.
    #[error("{0}")]
    Config(String),
    /// A request field failed to deserialize; `field` is its JSON path.
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("unknown individual {0}")]
    UnknownIndividual(String),
    #[error("cannot load knowledge base: {0}")]
    KbLoad(String),
    #[error("SPARQL endpoint failure: {0}")]
    Endpoint(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Field { .. } | AppError::UnknownIndividual(_) => 2,
            AppError::KbLoad(_) => 3,
            AppError::Endpoint(_) => 4,
            AppError::Internal(_) => 1,
        }
    }
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownIndividual(x) => AppError::UnknownIndividual(x),
            Error::Backend(m) => AppError::Endpoint(m),
            Error::NTriples { .. }
            | Error::Io(_)
            | Error::UnsupportedFormat(_)
            | Error::VocabularyClash { .. } => AppError::KbLoad(e.to_string()),
            Error::InvalidConfig(_) | Error::InvalidProblem(_) | Error::InvalidIri { .. } => {
                AppError::Config(e.to_string())
            }
            other => AppError::Internal(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Learner {
    #[default]
    Celoe,
    Ocel,
    Evo,
}

#[derive(Clone, Debug)]
pub struct LearnRequest {
    pub problem: LearningProblem,
    pub learner: Learner,
    /// Field overrides for the learner's configuration object.
    pub overrides: Map<String, Value>,
    pub seed: Option<u64>,
    pub emit_sparql: bool,
    pub verbalize: bool,
}

impl LearnRequest {
    pub fn new(problem: LearningProblem, learner: Learner) -> Self {
        Self {
            problem,
            learner,
            overrides: Map::new(),
            seed: None,
            emit_sparql: false,
            verbalize: false,
        }
    }
}

pub enum Settings {
    Search(LearnerConfig),
    Evo(EvoConfig),
}

impl Settings {
    pub fn max_runtime_seconds(&mut self) -> &mut f64 {
        match self {
            Settings::Search(c) => &mut c.max_runtime_seconds,
            Settings::Evo(c) => &mut c.max_runtime_seconds,
        }
    }
}

fn merge<T: Serialize + for<'de> Deserialize<'de>>(
    base: T,
    overrides: &Map<String, Value>,
) -> Result<T, AppError> {
    let Value::Object(mut fields) =
        serde_json::to_value(base).map_err(|e| AppError::Internal(e.to_string()))?
    else {
        return Err(AppError::Internal("configuration is not an object".into()));
    };
    fields.extend(overrides.iter().map(|(k, v)| (k.clone(), v.clone())));
    serde_path_to_error::deserialize(Value::Object(fields)).map_err(|e| {
        let path = e.path().to_string();
        AppError::Field {
            field: if path == "." {
                "config".into()
            } else {
                format!("config.{path}")
            },
            message: e.into_inner().to_string(),
        }
    })
}

/// Defaults for `learner`, then `overrides`, then `seed`.
pub fn settings(
    learner: Learner,
    overrides: &Map<String, Value>,
    seed: Option<u64>,
) -> Result<Settings, AppError> {
    if overrides.contains_key("preset") {
        return Err(AppError::Field {
            field: "config.preset".into(),
            message: "choose the preset with the learner field".into(),
        });
    }
    let settings = match learner {
        Learner::Celoe | Learner::Ocel => {
            let preset = if learner == Learner::Ocel {
                Preset::Ocel
            } else {
                Preset::Celoe
            };
            let mut c = merge(
                LearnerConfig {
                    preset,
                    ..LearnerConfig::default()
                },
                overrides,
            )?;
            if let Some(s) = seed {
                c.random_seed = s;
            }
            c.validate()?;
            Settings::Search(c)
        }
        Learner::Evo => {
            let mut c = merge(EvoConfig::default(), overrides)?;
            if let Some(s) = seed {
                c.random_seed = s;
            }
            c.validate()?;
            Settings::Evo(c)
        }
    };
    Ok(settings)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub manchester: String,
    pub dl: String,
    pub f1: f64,
    pub accuracy: f64,
    pub length: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparql: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verbalization: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunStats {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes_expanded: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub hypotheses: Vec<HypothesisReport>,
    pub stats: RunStats,
}

impl Report {
    /// The JSON document both front ends emit.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, h) in self.hypotheses.iter().enumerate() {
            out.push_str(&format!(
                "{}. {}    [{}]  f1={:.4} accuracy={:.4} length={}\n",
                i + 1,
                h.dl,
                h.manchester,
                h.f1,
                h.accuracy,
                h.length
            ));
            if let Some(v) = &h.verbalization {
                out.push_str(&format!("   {v}\n"));
            }
            if let Some(q) = &h.sparql {
                for line in q.lines() {
                    out.push_str(&format!("   {line}\n"));
                }
            }
        }
        let mut stats = Vec::new();
        if let Some(n) = self.stats.nodes_expanded {
            stats.push(format!("nodes expanded: {n}"));
        }
        if let Some(g) = self.stats.generations {
            stats.push(format!("generations: {g}"));
        }
        stats.push(format!("wall time: {} ms", self.stats.wall_ms));
        out.push_str(&stats.join(", "));
        out.push('\n');
        out
    }
}

/// A loaded knowledge source, shared read-only between requests.
pub struct Engine {
    backend: Arc<dyn RetrievalBackend>,
    labels: LabelMap,
    compile_options: CompileOptions,
}

impl Engine {
    pub fn from_kb(kb: KnowledgeBase) -> Self {
        let labels = LabelMap::from_kb(&kb);
        Self {
            backend: Arc::new(Reasoner::new(kb)),
            labels,
            compile_options: CompileOptions::default(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, AppError> {
        let triples =
            ntriples::read_ntriples_file(path).map_err(|e| AppError::KbLoad(e.to_string()))?;
        let kb =
            KnowledgeBase::from_triples(&triples).map_err(|e| AppError::KbLoad(e.to_string()))?;
        Ok(Self::from_kb(kb))
    }

    pub fn from_endpoint(url: &str, timeout: Duration) -> Result<Self, AppError> {
        let backend = EndpointBackend::connect(SparqlClient::new(url, timeout))
            .map_err(|e| AppError::Endpoint(e.to_string()))?;
        Ok(Self {
            backend: Arc::new(backend),
            labels: LabelMap::default(),
            compile_options: CompileOptions::default(),
        })
    }

    pub fn backend(&self) -> &dyn RetrievalBackend {
        &*self.backend
    }

    pub fn statistics(&self) -> KbStatistics {
        self.backend.knowledge_base().statistics()
    }

    pub fn learn(&self, request: &LearnRequest) -> Result<Report, AppError> {
        let settings = settings(request.learner, &request.overrides, request.seed)?;
        self.learn_with(request, settings)
    }

    pub fn learn_with(
        &self,
        request: &LearnRequest,
        settings: Settings,
    ) -> Result<Report, AppError> {
        request
            .problem
            .validate_against(self.backend.knowledge_base())?;
        let started = Instant::now();
        let (hypotheses, nodes_expanded, generations) = match settings {
            Settings::Search(c) => {
                let out = learn(&*self.backend, &request.problem, &c)?;
                (out.hypotheses, Some(out.stats.nodes_expanded), None)
            }
            Settings::Evo(c) => {
                let out = evolve(&*self.backend, &request.problem, &c)?;
                (vec![out.best], None, Some(out.generations_run))
            }
        };
        let wall_ms = started.elapsed().as_millis() as u64;
        Ok(Report {
            hypotheses: hypotheses
                .iter()
                .map(|h| self.describe(h, request))
                .collect(),
            stats: RunStats {
                nodes_expanded,
                generations,
                wall_ms,
            },
        })
    }

    fn describe(&self, h: &Hypothesis, request: &LearnRequest) -> HypothesisReport {
        HypothesisReport {
            manchester: h.manchester.clone(),
            dl: h.dl.clone(),
            f1: h.f1(),
            accuracy: h.accuracy(),
            length: h.length,
            sparql: request.emit_sparql.then(|| {
                compile_with(&h.expr, self.backend.hierarchy(), &self.compile_options).query_text
            }),
            verbalization: request.verbalize.then(|| verbalize(&h.expr, &self.labels)),
        }
    }
}

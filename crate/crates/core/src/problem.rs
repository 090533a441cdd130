//! Learning problems and hypothesis quality.

use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::ClassExpression;
use crate::iri::Iri;
use crate::kb::KnowledgeBase;
use crate::reasoner::Reasoner;

/// Positive and negative example individuals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearningProblem {
    label: Option<String>,
    positives: BTreeSet<Iri>,
    negatives: BTreeSet<Iri>,
}

/// Wire format of a learning problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningProblemDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub positive_examples: Vec<Iri>,
    pub negative_examples: Vec<Iri>,
}

impl LearningProblem {
    pub fn new(
        positives: impl IntoIterator<Item = Iri>,
        negatives: impl IntoIterator<Item = Iri>,
        label: Option<String>,
    ) -> Result<Self> {
        let positives: BTreeSet<Iri> = positives.into_iter().collect();
        let negatives: BTreeSet<Iri> = negatives.into_iter().collect();
        if positives.is_empty() {
            return Err(Error::InvalidProblem(
                "positive_examples must not be empty".into(),
            ));
        }
        if let Some(both) = positives.intersection(&negatives).next() {
            return Err(Error::InvalidProblem(format!(
                "{both} is both a positive and a negative example"
            )));
        }
        Ok(Self {
            label,
            positives,
            negatives,
        })
    }

    pub fn from_document(doc: LearningProblemDocument) -> Result<Self> {
        Self::new(doc.positive_examples, doc.negative_examples, doc.label)
    }

    /// Parses `{"label"?, "positive_examples": [...], "negative_examples": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LearningProblemDocument =
            serde_json::from_str(text).map_err(|e| Error::InvalidProblem(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn to_document(&self) -> LearningProblemDocument {
        LearningProblemDocument {
            label: self.label.clone(),
            positive_examples: self.positives.iter().cloned().collect(),
            negative_examples: self.negatives.iter().cloned().collect(),
        }
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn positives(&self) -> &BTreeSet<Iri> {
        &self.positives
    }

    pub fn negatives(&self) -> &BTreeSet<Iri> {
        &self.negatives
    }

    pub fn is_example(&self, individual: &Iri) -> bool {
        self.positives.contains(individual) || self.negatives.contains(individual)
    }

    /// Every example must belong to the individual universe of `kb`.
    pub fn validate_against(&self, kb: &KnowledgeBase) -> Result<()> {
        match self
            .positives
            .iter()
            .chain(&self.negatives)
            .find(|x| kb.individual_id(x).is_none())
        {
            Some(missing) => Err(Error::UnknownIndividual(missing.to_string())),
            None => Ok(()),
        }
    }
}

/// Confusion matrix of a hypothesis against a learning problem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct QualityResult {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl QualityResult {
    /// `2tp / (2tp + fp + fn)`, zero when the denominator is zero.
    pub fn f1(&self) -> Ratio<u64> {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }

    pub fn accuracy(&self) -> Ratio<u64> {
        ratio(self.tp + self.tn, self.tp + self.tn + self.fp + self.fn_)
    }

    pub fn precision(&self) -> Ratio<u64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Ratio<u64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.fp + self.tn
    }

    /// Same hypothesis negated: covered and uncovered examples swap.
    pub fn complemented(&self) -> Self {
        Self {
            tp: self.fn_,
            fp: self.tn,
            tn: self.fp,
            fn_: self.tp,
        }
    }
}

fn ratio(num: u64, den: u64) -> Ratio<u64> {
    if den == 0 {
        Ratio::new(0, 1)
    } else {
        Ratio::new(num, den)
    }
}

pub fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Scalar objective the learners maximize.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualityFunction {
    #[default]
    F1,
    Accuracy,
}

impl QualityFunction {
    pub fn score(self, q: &QualityResult) -> f64 {
        match self {
            QualityFunction::F1 => to_f64(q.f1()),
            QualityFunction::Accuracy => to_f64(q.accuracy()),
        }
    }
}

/// Quality of `expr`, plus how many individuals it retrieves in total.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub quality: QualityResult,
    pub retrieved: u64,
}

impl Coverage {
    /// Retrieved individuals that are neither positive nor negative examples.
    pub fn unlabeled(&self) -> u64 {
        self.retrieved - self.quality.tp - self.quality.fp
    }
}

/// Confusion matrix of `expr` on `problem` under the local reasoner.
pub fn evaluate(
    reasoner: &Reasoner,
    problem: &LearningProblem,
    expr: &ClassExpression,
) -> Result<QualityResult> {
    Ok(coverage(reasoner, problem, expr)?.quality)
}

pub(crate) fn coverage(
    reasoner: &Reasoner,
    problem: &LearningProblem,
    expr: &ClassExpression,
) -> Result<Coverage> {
    let kb = reasoner.kb();
    problem.validate_against(kb)?;
    let retrieved = reasoner.instances(expr)?;
    let count = |examples: &BTreeSet<Iri>| {
        examples
            .iter()
            .filter(|x| retrieved.contains(kb.individual_id(x).expect("validated")))
            .count() as u64
    };
    let tp = count(&problem.positives);
    let fp = count(&problem.negatives);
    Ok(Coverage {
        quality: QualityResult {
            tp,
            fp,
            tn: problem.negatives.len() as u64 - fp,
            fn_: problem.positives.len() as u64 - tp,
        },
        retrieved: retrieved.count() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    #[test]
    fn json_round() {
        let lp = LearningProblem::from_json(crate::fixtures::MARRIED_FEMALE_LP).unwrap();
        assert_eq!(lp.positives().len(), 3);
        assert_eq!(lp.negatives().len(), 2);
        assert_eq!(lp.label(), Some("Married Female"));
    }

    #[test]
    fn empty_negatives_allowed() {
        let lp =
            LearningProblem::from_json(r#"{"positive_examples":["a:x"],"negative_examples":[]}"#)
                .unwrap();
        assert!(lp.negatives().is_empty());
    }

    #[test]
    fn overlap_rejected() {
        let err = LearningProblem::from_json(
            r#"{"positive_examples":["a:x","a:y"],"negative_examples":["a:y"]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidProblem(m) if m.contains("a:y")));
    }

    #[test]
    fn schema_violations() {
        for doc in [
            r#"{"positive_examples":["a:x"]}"#,
            r#"{"positive_examples":"a:x","negative_examples":[]}"#,
            r#"{"positive_examples":[],"negative_examples":[]}"#,
            r#"{"positive_examples":["a x"],"negative_examples":[]}"#,
            r#"{"positives":["a:x"],"positive_examples":["a:x"],"negative_examples":[]}"#,
            "not json",
        ] {
            assert!(LearningProblem::from_json(doc).is_err(), "{doc}");
        }
    }

    #[test]
    fn f1_arithmetic() {
        let q = QualityResult {
            tp: 3,
            fp: 2,
            tn: 0,
            fn_: 0,
        };
        assert_eq!(q.f1(), Ratio::new(3, 4));
        assert_eq!(q.precision(), Ratio::new(3, 5));
        assert_eq!(q.recall(), Ratio::new(1, 1));
        let nothing = QualityResult {
            tp: 0,
            fp: 0,
            tn: 2,
            fn_: 3,
        };
        assert_eq!(nothing.f1(), Ratio::new(0, 1));
        assert_eq!(nothing.accuracy(), Ratio::new(2, 5));
        assert_eq!(nothing.precision(), Ratio::new(0, 1));
        assert_eq!(QualityResult::default().f1(), Ratio::new(0, 1));
    }

    #[test]
    fn validate_against_kb() {
        let kb = KnowledgeBase::default();
        let lp = LearningProblem::new([iri("a:x")], [], None).unwrap();
        assert!(matches!(
            lp.validate_against(&kb),
            Err(Error::UnknownIndividual(_))
        ));
    }
}

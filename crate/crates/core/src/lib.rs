//! Class expression learning over RDF knowledge graphs.
//!
//! Load an N-Triples ontology into a [`KnowledgeBase`], wrap it in the
//! closed-world [`Reasoner`], describe positive and negative examples with a
//! [`LearningProblem`], and search for a [`ClassExpression`] separating them
//! with either the refinement-based [`search::learn`] or the evolutionary
//! [`evo::evolve`]. Expressions render to DL or Manchester syntax and to
//! English through [`verbalize`].

pub mod backend;
pub mod bitset;
pub mod error;
pub mod evo;
pub mod expr;
pub mod fixtures;
pub mod generate;
pub mod hierarchy;
pub mod iri;
pub mod kb;
pub mod manchester;
pub mod ntriples;
pub mod problem;
pub mod reasoner;
pub mod refinement;
pub mod render;
pub mod search;
pub mod verbalize;

pub use backend::RetrievalBackend;
pub use error::{Error, Result};
pub use expr::ClassExpression;
pub use hierarchy::ClassHierarchy;
pub use iri::Iri;
pub use kb::KnowledgeBase;
pub use manchester::parse_expression;
pub use ntriples::{parse_ntriples, Term, Triple};
pub use problem::{evaluate, LearningProblem, QualityFunction, QualityResult};
pub use reasoner::Reasoner;
pub use refinement::{RefinementConfig, Refiner};
pub use render::{render, Syntax};

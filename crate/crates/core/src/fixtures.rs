//! The bundled Family knowledge base and its "married female" learning problem.
//!
//! Eight people in three married couples, with gender assertions and the
//! family class hierarchy. Used by tests, examples and the CLI demo.

pub const FAMILY_NS: &str = "http://www.benchmark.org/family#";

/// N-Triples source of the Family knowledge base.
pub const FAMILY_NT: &str = include_str!("../fixtures/family.nt");

/// Learning-problem JSON: married women are positive, unmarried women negative.
pub const MARRIED_FEMALE_LP: &str = include_str!("../fixtures/married_female.json");

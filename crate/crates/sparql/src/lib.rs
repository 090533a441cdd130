//! SPARQL retrieval for class expressions.
//!
//! [`compile`] turns an expression into a `SELECT DISTINCT ?x` query,
//! [`evaluate_locally`] answers such a query over an in-memory triple set,
//! [`SparqlClient`] sends it to a SPARQL 1.1 endpoint, and
//! [`EndpointBackend`] lets the learners run against an endpoint.

pub mod algebra;
pub mod client;
pub mod compile;
pub mod endpoint;
pub mod error;
pub mod local;
pub mod parse;
pub mod results;

pub use client::{execute, SparqlClient};
pub use compile::{compile, compile_with, CompileOptions, CompiledQuery, Universe};
pub use endpoint::EndpointBackend;
pub use error::SparqlError;
pub use local::{evaluate_locally, LocalStore};
pub use parse::parse_query;
pub use results::SparqlResults;

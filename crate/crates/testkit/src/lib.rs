//! Oracles for the test suites. Nothing here is used by the library crates.

pub mod brute_force;
pub mod sparql_grammar;
pub mod triple_oracle;

//! Front ends for the concept learner: the `conceptlearn` command and its
//! HTTP service. Both go through [`engine::Engine`], so a problem learned
//! from the command line and over HTTP yields the same JSON.

pub mod engine;
pub mod service;

pub use engine::{AppError, Engine, LearnRequest, Learner, Report};

/// Environment variable holding the default SPARQL endpoint URL.
pub const ENDPOINT_ENV: &str = "CONCEPTLEARN_ENDPOINT";

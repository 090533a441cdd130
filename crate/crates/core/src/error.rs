use thiserror::Error;

/// Errors raised by the core engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid IRI {iri:?}: {reason}")]
    InvalidIri { iri: String, reason: String },

    #[error("N-Triples syntax error at line {line}, column {column}: {message}")]
    NTriples {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("cannot read {0}")]
    Io(String),

    #[error("unsupported input format: {0}")]
    UnsupportedFormat(String),

    #[error("{iri} is used both as a class and as an object property")]
    VocabularyClash { iri: String },

    #[error("expression parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),

    #[error("ambiguous symbol {symbol:?}: matches {candidates:?}; use a full <IRI>")]
    AmbiguousSymbol {
        symbol: String,
        candidates: Vec<String>,
    },

    #[error("unknown class {0}")]
    UnknownClass(String),

    #[error("unknown object property {0}")]
    UnknownRole(String),

    #[error("unknown individual {0}")]
    UnknownIndividual(String),

    #[error("invalid learning problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A remote retrieval backend failed; distinct from an empty answer.
    #[error("retrieval backend failure: {0}")]
    Backend(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

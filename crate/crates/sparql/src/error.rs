use thiserror::Error;

/// Endpoint and query failures. None of these is ever reported as an
/// empty result.
#[derive(Debug, Error)]
pub enum SparqlError {
    #[error("cannot reach endpoint: {0}")]
    Transport(String),
    #[error("endpoint did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("endpoint answered HTTP {status}: {body}")]
    HttpStatus { status: u16, body: String },
    #[error("malformed SPARQL results: {0}")]
    Malformed(String),
    #[error("query parse error at {position}: {message}")]
    Parse { position: usize, message: String },
}

impl From<SparqlError> for conceptlearn_core::Error {
    fn from(e: SparqlError) -> Self {
        conceptlearn_core::Error::Backend(e.to_string())
    }
}

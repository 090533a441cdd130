//! Blocking SPARQL 1.1 Protocol client.

use std::collections::BTreeSet;
use std::io;
use std::time::Duration;

use conceptlearn_core::iri::Iri;

use crate::compile::CompiledQuery;
use crate::error::SparqlError;
use crate::results::{SparqlResults, CONTENT_TYPE};

/// Queries are sent as `application/x-www-form-urlencoded` POSTs with a
/// `query` parameter.
#[derive(Clone, Debug)]
pub struct SparqlClient {
    endpoint: String,
    timeout: Duration,
    bearer_token: Option<String>,
    agent: ureq::Agent,
}

impl SparqlClient {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            timeout,
            bearer_token: None,
            agent,
        }
    }

    /// Sent as `Authorization: Bearer <token>`.
    pub fn with_bearer_token(mut self, token: impl Into<String>) -> Self {
        self.bearer_token = Some(token.into());
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn select(&self, query: &str) -> Result<SparqlResults, SparqlError> {
        let mut request = self
            .agent
            .post(&self.endpoint)
            .header("Accept", CONTENT_TYPE);
        if let Some(token) = &self.bearer_token {
            request = request.header("Authorization", format!("Bearer {token}"));
        }
        let mut response = request
            .send_form([("query", query)])
            .map_err(|e| self.transport(e))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .with_config()
            .limit(u64::MAX)
            .read_to_string()
            .map_err(|e| self.transport(e))?;
        if !(200..300).contains(&status) {
            let mut body = body;
            body.truncate(500);
            return Err(SparqlError::HttpStatus { status, body });
        }
        SparqlResults::from_json(&body)
    }

    /// IRIs bound to the query's root variable.
    pub fn execute(&self, query: &CompiledQuery) -> Result<BTreeSet<Iri>, SparqlError> {
        self.select(&query.query_text)?.iris(&query.root_variable)
    }

    fn transport(&self, e: ureq::Error) -> SparqlError {
        match e {
            ureq::Error::Timeout(_) => SparqlError::Timeout(self.timeout),
            ureq::Error::Io(io) if io.kind() == io::ErrorKind::TimedOut => {
                SparqlError::Timeout(self.timeout)
            }
            other => SparqlError::Transport(other.to_string()),
        }
    }
}

/// One-shot form of [`SparqlClient::execute`].
pub fn execute(
    endpoint_url: &str,
    query: &CompiledQuery,
    timeout: Duration,
) -> Result<BTreeSet<Iri>, SparqlError> {
    SparqlClient::new(endpoint_url, timeout).execute(query)
}

//! `application/sparql-results+json` documents.

use std::collections::{BTreeMap, BTreeSet};

use conceptlearn_core::iri::Iri;
use conceptlearn_core::ntriples::Term;
use serde::{Deserialize, Serialize};

use crate::error::SparqlError;
use crate::local::Solution;

pub const CONTENT_TYPE: &str = "application/sparql-results+json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparqlResults {
    pub head: Head,
    pub results: Bindings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Head {
    pub vars: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bindings {
    pub bindings: Vec<BTreeMap<String, RdfTerm>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RdfTerm {
    Uri {
        value: String,
    },
    #[serde(alias = "typed-literal")]
    Literal {
        value: String,
        #[serde(rename = "xml:lang", default, skip_serializing_if = "Option::is_none")]
        lang: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        datatype: Option<String>,
    },
    Bnode {
        value: String,
    },
}

impl RdfTerm {
    /// Converts a stored term; literals keep their verbatim N-Triples text
    /// split into lexical form, language and datatype.
    pub fn from_term(t: &Term) -> Self {
        match t {
            Term::Iri(i) => RdfTerm::Uri {
                value: i.as_str().into(),
            },
            Term::Literal(text) => {
                let body = text.strip_prefix('"').unwrap_or(text);
                let (value, suffix) = match body.rfind('"') {
                    Some(end) => (&body[..end], &body[end + 1..]),
                    None => (body, ""),
                };
                RdfTerm::Literal {
                    value: value.into(),
                    lang: suffix.strip_prefix('@').map(str::to_string),
                    datatype: suffix
                        .strip_prefix("^^")
                        .map(|d| d.trim_start_matches('<').trim_end_matches('>').to_string()),
                }
            }
        }
    }
}

impl SparqlResults {
    pub fn from_solutions(vars: &[String], rows: &[Solution]) -> Self {
        Self {
            head: Head {
                vars: vars.to_vec(),
            },
            results: Bindings {
                bindings: rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .filter(|(k, _)| vars.contains(k))
                            .map(|(k, v)| (k.clone(), RdfTerm::from_term(v)))
                            .collect()
                    })
                    .collect(),
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SparqlError> {
        serde_json::from_str(text).map_err(|e| SparqlError::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("results serialize")
    }

    /// IRIs bound to `var`. Blank nodes and literals are skipped; a
    /// variable missing from the head is an error.
    pub fn iris(&self, var: &str) -> Result<BTreeSet<Iri>, SparqlError> {
        Ok(self
            .rows_of(&[var])?
            .into_iter()
            .map(|mut r| r.remove(0))
            .collect())
    }

    /// Rows in which every variable in `vars` is bound to an IRI.
    pub fn rows_of(&self, vars: &[&str]) -> Result<Vec<Vec<Iri>>, SparqlError> {
        if let Some(missing) = vars
            .iter()
            .find(|v| !self.head.vars.iter().any(|h| h == *v))
        {
            return Err(SparqlError::Malformed(format!(
                "variable ?{missing} not in result head"
            )));
        }
        let mut out = Vec::new();
        'rows: for b in &self.results.bindings {
            let mut row = Vec::with_capacity(vars.len());
            for v in vars {
                match b.get(*v) {
                    Some(RdfTerm::Uri { value }) => row
                        .push(Iri::new(value).map_err(|e| SparqlError::Malformed(e.to_string()))?),
                    _ => continue 'rows,
                }
            }
            out.push(row);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_standard_document() {
        let doc = r#"{"head":{"vars":["x"]},"results":{"bindings":[
            {"x":{"type":"uri","value":"http://e/a"}},
            {"x":{"type":"bnode","value":"b0"}},
            {"x":{"type":"literal","value":"v","xml:lang":"en"}},
            {"x":{"type":"typed-literal","value":"1","datatype":"http://www.w3.org/2001/XMLSchema#int"}}
        ]}}"#;
        let r = SparqlResults::from_json(doc).unwrap();
        assert_eq!(r.iris("x").unwrap().len(), 1);
        assert!(matches!(r.iris("y"), Err(SparqlError::Malformed(_))));
    }

    #[test]
    fn malformed_documents() {
        for doc in [
            "",
            "{}",
            r#"{"head":{},"results":{"bindings":[]}}"#,
            "<sparql/>",
        ] {
            assert!(matches!(
                SparqlResults::from_json(doc),
                Err(SparqlError::Malformed(_))
            ));
        }
    }

    #[test]
    fn literal_conversion() {
        assert_eq!(
            RdfTerm::from_term(&Term::Literal("\"chat\"@fr".into())),
            RdfTerm::Literal {
                value: "chat".into(),
                lang: Some("fr".into()),
                datatype: None
            }
        );
        let t = RdfTerm::from_term(&Term::Literal("\"1\"^^<http://x/int>".into()));
        assert!(matches!(t, RdfTerm::Literal { datatype: Some(d), .. } if d == "http://x/int"));
    }
}

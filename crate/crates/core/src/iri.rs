//! Interned IRIs and the handful of vocabulary terms the engine understands.

use std::borrow::Borrow;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const RDFS_COMMENT: &str = "http://www.w3.org/2000/01/rdf-schema#comment";
pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
pub const OWL_NAMED_INDIVIDUAL: &str = "http://www.w3.org/2002/07/owl#NamedIndividual";
pub const OWL_ONTOLOGY: &str = "http://www.w3.org/2002/07/owl#Ontology";
pub const OWL_THING: &str = "http://www.w3.org/2002/07/owl#Thing";
pub const OWL_NOTHING: &str = "http://www.w3.org/2002/07/owl#Nothing";
pub const OWL_EQUIVALENT_CLASS: &str = "http://www.w3.org/2002/07/owl#equivalentClass";

/// An absolute IRI.
///
/// Cloning is a reference-count bump. Two `Iri`s produced by the same
/// [`Interner`] share storage, so equality short-circuits on pointer identity.
#[derive(Clone)]
pub struct Iri(Arc<str>);

impl Iri {
    /// Validates and wraps an IRI string (no angle brackets).
    pub fn new(value: impl AsRef<str>) -> Result<Self, Error> {
        let value = value.as_ref();
        if value.is_empty() {
            return Err(Error::InvalidIri {
                iri: value.to_owned(),
                reason: "empty".into(),
            });
        }
        if let Some(c) = value.chars().find(|c| {
            c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`')
        }) {
            return Err(Error::InvalidIri {
                iri: value.to_owned(),
                reason: format!("illegal character {c:?}"),
            });
        }
        Ok(Iri(Arc::from(value)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The fragment after the last `#`, `/` or `:`; the whole IRI if none.
    pub fn local_name(&self) -> &str {
        let s = self.as_str();
        let cut = s
            .rfind('#')
            .or_else(|| s.rfind('/'))
            .or_else(|| s.rfind(':'))
            .map(|i| i + 1)
            .unwrap_or(0);
        if cut >= s.len() {
            s
        } else {
            &s[cut..]
        }
    }

    pub fn ptr_eq(&self, other: &Iri) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl PartialEq for Iri {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other) || *self.0 == *other.0
    }
}

impl Eq for Iri {}

impl Hash for Iri {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl PartialOrd for Iri {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Iri {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self.ptr_eq(other) {
            return std::cmp::Ordering::Equal;
        }
        self.0.cmp(&other.0)
    }
}

impl Borrow<str> for Iri {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Iri {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Iri::new(s).map_err(serde::de::Error::custom)
    }
}

/// Hands out one shared allocation per distinct IRI string.
#[derive(Debug, Default)]
pub struct Interner {
    pool: HashSet<Iri>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, iri: &Iri) -> Iri {
        if let Some(existing) = self.pool.get(iri.as_str()) {
            return existing.clone();
        }
        self.pool.insert(iri.clone());
        iri.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_whitespace() {
        assert!(Iri::new("").is_err());
        assert!(Iri::new("http://x/a b").is_err());
        assert!(Iri::new("http://x/a>").is_err());
        assert!(Iri::new("http://x/a").is_ok());
    }

    #[test]
    fn local_names() {
        assert_eq!(
            Iri::new("http://www.benchmark.org/family#Female")
                .unwrap()
                .local_name(),
            "Female"
        );
        assert_eq!(
            Iri::new("http://example.org/onto/married")
                .unwrap()
                .local_name(),
            "married"
        );
        assert_eq!(Iri::new("a:x").unwrap().local_name(), "x");
        assert_eq!(Iri::new("urn").unwrap().local_name(), "urn");
        assert_eq!(Iri::new("http://x/").unwrap().local_name(), "http://x/");
    }

    #[test]
    fn interning_shares_storage() {
        let mut interner = Interner::new();
        let a = interner.intern(&Iri::new("http://x/a").unwrap());
        let b = interner.intern(&Iri::new("http://x/a").unwrap());
        assert!(a.ptr_eq(&b));
        assert_eq!(a, b);
    }
}

//! The HTTP client and the endpoint backend against an in-process mock
//! triplestore serving the Family fixture.

use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Form, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::routing::post;
use axum::Router;
use conceptlearn_core::fixtures::{FAMILY_NS, FAMILY_NT, MARRIED_FEMALE_LP};
use conceptlearn_core::search::{learn, LearnerConfig};
use conceptlearn_core::*;
use conceptlearn_sparql::*;
use serde::Deserialize;

#[derive(Deserialize)]
struct QueryForm {
    query: String,
}

async fn sparql(
    State(store): State<Arc<LocalStore>>,
    Form(f): Form<QueryForm>,
) -> impl IntoResponse {
    match parse_query(&f.query) {
        Ok(q) => {
            let rows = store.query(&q);
            let body = SparqlResults::from_solutions(&q.select.projection, &rows).to_json();
            (
                StatusCode::OK,
                [(header::CONTENT_TYPE, "application/sparql-results+json")],
                body,
            )
        }
        Err(e) => (
            StatusCode::BAD_REQUEST,
            [(header::CONTENT_TYPE, "text/plain")],
            e.to_string(),
        ),
    }
}

async fn failing() -> impl IntoResponse {
    (StatusCode::INTERNAL_SERVER_ERROR, "store exploded")
}

async fn garbage() -> impl IntoResponse {
    (
        [(header::CONTENT_TYPE, "application/sparql-results+json")],
        "{\"head\":",
    )
}

async fn slow() -> impl IntoResponse {
    tokio::time::sleep(Duration::from_secs(5)).await;
    "{}"
}

/// Starts the mock on a background runtime and returns its base URL.
fn spawn_mock() -> String {
    let store = Arc::new(LocalStore::new(&parse_ntriples(FAMILY_NT).unwrap()));
    let app = Router::new()
        .route("/sparql", post(sparql))
        .route("/fail", post(failing))
        .route("/garbage", post(garbage))
        .route("/slow", post(slow))
        .with_state(store);
    let (tx, rx) = std::sync::mpsc::channel::<SocketAddr>();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    format!("http://{}", rx.recv().unwrap())
}

fn fam(local: &str) -> Iri {
    Iri::new(format!("{FAMILY_NS}{local}")).unwrap()
}

fn reasoner() -> Reasoner {
    Reasoner::new(KnowledgeBase::from_triples(&parse_ntriples(FAMILY_NT).unwrap()).unwrap())
}

const TIMEOUT: Duration = Duration::from_secs(10);

#[test]
fn married_females_over_http() {
    let base = spawn_mock();
    let r = reasoner();
    let e = parse_expression("Female and (married some Thing)", &r.kb().symbols()).unwrap();
    let q = compile(&e, r.hierarchy(), true);
    let got = execute(&format!("{base}/sparql"), &q, TIMEOUT).unwrap();
    let lp = LearningProblem::from_json(MARRIED_FEMALE_LP).unwrap();
    assert_eq!(&got, lp.positives());
    let bottom = compile(&ClassExpression::Bottom, r.hierarchy(), true);
    assert!(execute(&format!("{base}/sparql"), &bottom, TIMEOUT)
        .unwrap()
        .is_empty());
}

#[test]
fn error_kinds_are_distinguished() {
    let base = spawn_mock();
    let r = reasoner();
    let q = compile(&ClassExpression::Named(fam("Male")), r.hierarchy(), true);

    // bind then drop to get a port nothing listens on
    let closed = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap();
    let err = execute(&format!("http://{closed}/sparql"), &q, TIMEOUT).unwrap_err();
    assert!(matches!(err, SparqlError::Transport(_)), "{err:?}");

    let err = execute(&format!("{base}/fail"), &q, TIMEOUT).unwrap_err();
    assert!(
        matches!(&err, SparqlError::HttpStatus { status: 500, body } if body.contains("exploded")),
        "{err:?}"
    );

    let err = execute(&format!("{base}/garbage"), &q, TIMEOUT).unwrap_err();
    assert!(matches!(err, SparqlError::Malformed(_)), "{err:?}");

    let err = execute(&format!("{base}/slow"), &q, Duration::from_millis(300)).unwrap_err();
    assert!(matches!(err, SparqlError::Timeout(_)), "{err:?}");

    let err = execute(&format!("{base}/missing"), &q, TIMEOUT).unwrap_err();
    assert!(
        matches!(err, SparqlError::HttpStatus { status: 404, .. }),
        "{err:?}"
    );
}

#[test]
fn endpoint_backend_agrees_with_reasoner() {
    let base = spawn_mock();
    let r = reasoner();
    let backend =
        EndpointBackend::connect(SparqlClient::new(format!("{base}/sparql"), TIMEOUT)).unwrap();
    let kb = backend.knowledge_base();
    let as_set = |xs: &[Iri]| xs.iter().cloned().collect::<BTreeSet<_>>();
    assert_eq!(as_set(kb.classes()), as_set(r.kb().classes()));
    assert_eq!(as_set(kb.roles()), as_set(r.kb().roles()));
    assert_eq!(as_set(kb.individuals()), as_set(r.kb().individuals()));

    let lp = LearningProblem::from_json(MARRIED_FEMALE_LP).unwrap();
    for text in [
        "Female",
        "Female and (married some Thing)",
        "not Male",
        "married only Female",
        "married some Male",
        "Person and not (married some Thing)",
        "married some (not Female or Mother)",
    ] {
        let e = parse_expression(text, &r.kb().symbols()).unwrap();
        assert_eq!(
            *backend.instances(&e).unwrap(),
            r.instance_iris(&e).unwrap(),
            "{text}"
        );
        assert_eq!(
            backend.coverage(&lp, &e).unwrap(),
            r.coverage(&lp, &e).unwrap(),
            "{text}"
        );
    }
    let x = fam("F10F175");
    let mut t1 = backend.asserted_types(&x).unwrap();
    let mut t2 = r.asserted_types(&x).unwrap();
    t1.sort();
    t2.sort();
    assert_eq!(t1, t2);
    let mut e1 = backend.asserted_edges(&x).unwrap();
    let mut e2 = r.asserted_edges(&x).unwrap();
    e1.sort();
    e2.sort();
    assert_eq!(e1, e2);
}

#[test]
fn learning_through_the_endpoint_matches_local_learning() {
    let base = spawn_mock();
    let r = reasoner();
    let backend =
        EndpointBackend::connect(SparqlClient::new(format!("{base}/sparql"), TIMEOUT)).unwrap();
    let lp = LearningProblem::from_json(MARRIED_FEMALE_LP).unwrap();
    let cfg = LearnerConfig {
        max_runtime_seconds: 60.0,
        ..LearnerConfig::default()
    };
    let remote = learn(&backend, &lp, &cfg).unwrap();
    let local = learn(&r, &lp, &cfg).unwrap();
    let top = |o: &conceptlearn_core::search::LearnOutcome| {
        o.hypotheses
            .iter()
            .map(|h| (h.dl.clone(), h.quality))
            .collect::<Vec<_>>()
    };
    assert_eq!(top(&remote), top(&local));
    assert_eq!(
        remote.hypotheses[0].quality.f1(),
        num_rational::Ratio::from_integer(1)
    );
}

#[test]
fn unknown_prefix_query_is_rejected_by_mock_and_reported() {
    let base = spawn_mock();
    let client = SparqlClient::new(format!("{base}/sparql"), TIMEOUT);
    let err = client.select("SELECT ?x WHERE { ?x ex:p ?y }").unwrap_err();
    assert!(
        matches!(err, SparqlError::HttpStatus { status: 400, .. }),
        "{err:?}"
    );
}

//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p conceptlearn-cli --test acceptance`.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::{to_bytes, Body};
use axum::http::Request;
use conceptlearn_cli::service::router;
use conceptlearn_cli::Engine;
use conceptlearn_core::evo::{evolve, EvoConfig};
use conceptlearn_core::fixtures::{FAMILY_NS, FAMILY_NT, MARRIED_FEMALE_LP};
use conceptlearn_core::generate::random_expression;
use conceptlearn_core::search::{learn, LearnerConfig};
use conceptlearn_core::*;
use conceptlearn_sparql::{compile, evaluate_locally, CompileOptions, LocalStore};
use conceptlearn_testkit::brute_force::Enumerator;
use conceptlearn_testkit::sparql_grammar;
use conceptlearn_testkit::triple_oracle::TripleOracle;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn kb() -> KnowledgeBase {
    KnowledgeBase::from_triples(&parse_ntriples(FAMILY_NT).unwrap()).unwrap()
}

fn reasoner() -> Reasoner {
    Reasoner::new(kb())
}

fn fam(local: &str) -> Iri {
    Iri::new(format!("{FAMILY_NS}{local}")).unwrap()
}

fn married_female_problem() -> LearningProblem {
    LearningProblem::from_json(MARRIED_FEMALE_LP).unwrap()
}

/// The 200 expressions shared by criteria 2 and 3.
fn seeded_expressions(count: usize, seed: u64, max_length: usize) -> Vec<ClassExpression> {
    let kb = kb();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_expression(&mut rng, &kb, max_length))
        .collect()
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn married_female_with_celoe() -> Outcome {
    let r = reasoner();
    let lp = married_female_problem();
    let started = Instant::now();
    let out = learn(&r, &lp, &LearnerConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let top = out.hypotheses.first().ok_or("no hypothesis")?;
    ensure!(
        top.quality.f1() == Ratio::from_integer(1),
        "top F1 is {}",
        top.quality.f1()
    );
    let retrieval = r.instance_iris(&top.expr).map_err(|e| e.to_string())?;
    ensure!(
        &retrieval == lp.positives(),
        "retrieval of {} is {retrieval:?}",
        top.dl
    );
    let reference = ClassExpression::and([
        ClassExpression::Named(fam("Female")),
        ClassExpression::some(fam("married"), ClassExpression::Top),
    ]);
    let oracle = TripleOracle::new(FAMILY_NT);
    let names = |s: BTreeSet<Iri>| {
        s.into_iter()
            .map(|i| i.as_str().to_string())
            .collect::<BTreeSet<_>>()
    };
    ensure!(
        oracle.eval(&top.expr) == oracle.eval(&reference)
            && names(retrieval) == oracle.eval(&reference),
        "{} is not retrieval-equivalent to Female ⊓ ∃married.⊤",
        top.dl
    );
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "top {} (F1 = 1, retrieval = E⁺) in {elapsed:.2?}",
        top.dl
    ))
}

fn retrieval_matches_point_checks() -> Outcome {
    let r = reasoner();
    let exprs = seeded_expressions(200, 2024, 7);
    let started = Instant::now();
    for e in &exprs {
        let set = r.instance_iris(e).map_err(|err| err.to_string())?;
        let checked: BTreeSet<Iri> = r
            .kb()
            .individuals()
            .iter()
            .filter(|x| r.check(x, e).unwrap())
            .cloned()
            .collect();
        ensure!(
            set == checked,
            "instances and check disagree on {}",
            render(e, Syntax::Dl)
        );
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    // an oracle that reads the triples directly, outside the timed section
    let oracle = TripleOracle::new(FAMILY_NT);
    for e in &exprs {
        let set: BTreeSet<String> = r
            .instance_iris(e)
            .unwrap()
            .iter()
            .map(|i| i.as_str().to_string())
            .collect();
        ensure!(
            set == oracle.eval(e),
            "triple oracle disagrees on {}",
            render(e, Syntax::Dl)
        );
    }
    Ok(format!(
        "200/200 expressions agree (also with the triple oracle) in {elapsed:.2?}"
    ))
}

fn sparql_parity() -> Outcome {
    let triples = parse_ntriples(FAMILY_NT).unwrap();
    let store = LocalStore::new(&triples);
    let r = reasoner();
    let exprs = seeded_expressions(200, 2024, 7);
    for e in &exprs {
        let q = compile(e, r.hierarchy(), true);
        sparql_grammar::validate(&q.query_text)
            .map_err(|err| format!("invalid SPARQL ({err}): {}", q.query_text))?;
        let local = evaluate_locally(&store, r.hierarchy(), e, &CompileOptions::default());
        ensure!(
            local == r.instance_iris(e).unwrap(),
            "parity fails for {}",
            render(e, Syntax::Dl)
        );
    }
    Ok("200/200 queries valid SPARQL 1.1 and equal to instances()".into())
}

fn refinement_soundness() -> Outcome {
    let r = reasoner();
    let mut checked = 0usize;
    for cardinality in [false, true] {
        let cfg = RefinementConfig {
            use_cardinality: cardinality,
            ..RefinementConfig::default()
        };
        let refiner = Refiner::new(r.kb(), r.hierarchy(), cfg);
        for e in seeded_expressions(100, 77, 7) {
            let parent = r.instances(&e).unwrap();
            for child in refiner.refine(&e) {
                let c = r.instances(&child).unwrap();
                ensure!(
                    c.iter().all(|x| parent.contains(x)),
                    "{} refines {} but retrieves more",
                    render(&child, Syntax::Dl),
                    render(&e, Syntax::Dl)
                );
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} refinements of 100 expressions, all subsets of their parent"
    ))
}

fn random_problem(rng: &mut ChaCha8Rng, individuals: &[String]) -> (Vec<String>, Vec<String>) {
    let mut xs = individuals.to_vec();
    xs.shuffle(rng);
    let p = rng.gen_range(1..xs.len());
    let n = rng.gen_range(0..=xs.len() - p);
    (xs[..p].to_vec(), xs[p..p + n].to_vec())
}

fn learner_matches_brute_force() -> Outcome {
    let r = reasoner();
    let oracle = TripleOracle::new(FAMILY_NT);
    let enumerator = Enumerator::new(&oracle, None);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let married_female = married_female_problem();
    let mut problems = vec![(
        married_female
            .positives()
            .iter()
            .map(|i| i.as_str().to_string())
            .collect::<Vec<_>>(),
        married_female
            .negatives()
            .iter()
            .map(|i| i.as_str().to_string())
            .collect::<Vec<_>>(),
    )];
    problems.extend((0..30).map(|_| random_problem(&mut rng, enumerator.individuals())));
    let cfg = LearnerConfig {
        max_hypothesis_length: 5,
        max_runtime_seconds: 60.0,
        max_iterations: 1_000_000,
        ..LearnerConfig::default()
    };
    let iris = |xs: &[String]| {
        xs.iter()
            .map(|x| Iri::new(x.as_str()).unwrap())
            .collect::<Vec<_>>()
    };
    let mut imperfect = 0;
    for (pos, neg) in &problems {
        let lp = LearningProblem::new(iris(pos), iris(neg), None).unwrap();
        let best = enumerator.best_f1(pos, neg, 5);
        imperfect += usize::from(best < Ratio::from_integer(1));
        let out = learn(&r, &lp, &cfg).map_err(|e| e.to_string())?;
        let got = out.hypotheses[0].quality.f1();
        ensure!(
            got == best,
            "E⁺={} E⁻={}: learner {} (F1 {got}) vs brute force {best}",
            pos.len(),
            neg.len(),
            out.hypotheses[0].dl
        );
    }
    Ok(format!(
        "{} problems ({imperfect} without a perfect solution), learner best F1 equals exhaustive best up to length 5",
        problems.len()
    ))
}

fn evo_reaches_perfect() -> Outcome {
    let r = reasoner();
    let lp = married_female_problem();
    let mut perfect = 0;
    let mut details = Vec::new();
    for seed in 0..10u64 {
        let cfg = EvoConfig {
            random_seed: seed,
            generations: 50,
            ..EvoConfig::default()
        };
        let a = evolve(&r, &lp, &cfg).map_err(|e| e.to_string())?;
        let b = evolve(&r, &lp, &cfg).map_err(|e| e.to_string())?;
        ensure!(
            a.best.dl == b.best.dl
                && a.fitness_trace == b.fitness_trace
                && a.perfect_at == b.perfect_at,
            "seed {seed} is not deterministic"
        );
        if let Some(g) = a.perfect_at.filter(|&g| g <= 50) {
            perfect += 1;
            details.push(g.to_string());
        }
    }
    ensure!(perfect >= 9, "only {perfect}/10 seeds reached F1 = 1");
    Ok(format!(
        "{perfect}/10 seeds reach F1 = 1 (at generations {}), deterministic",
        details.join(",")
    ))
}

fn female_quality() -> Outcome {
    let r = reasoner();
    let q = evaluate(
        &r,
        &married_female_problem(),
        &ClassExpression::Named(fam("Female")),
    )
    .map_err(|e| e.to_string())?;
    // independent count from the triples
    let oracle = TripleOracle::new(FAMILY_NT);
    let females = oracle.eval(&ClassExpression::Named(fam("Female")));
    let lp = married_female_problem();
    let tp = lp
        .positives()
        .iter()
        .filter(|x| females.contains(x.as_str()))
        .count() as u64;
    let fp = lp
        .negatives()
        .iter()
        .filter(|x| females.contains(x.as_str()))
        .count() as u64;
    ensure!(
        (q.tp, q.fp) == (3, 2) && (tp, fp) == (3, 2),
        "tp={} fp={} (oracle {tp}/{fp})",
        q.tp,
        q.fp
    );
    ensure!(q.f1() == Ratio::new(3, 4), "f1 = {}", q.f1());
    Ok("tp=3 fp=2 f1=3/4".into())
}

/// The pretty-printed report up to its `stats` member.
fn hypotheses_part(json: &str) -> Result<&str, String> {
    json.find("\n  \"stats\"")
        .map(|i| &json[..i])
        .ok_or_else(|| format!("unexpected report layout: {json}"))
}

fn cli_and_service_agree() -> Outcome {
    let dir = std::env::temp_dir().join(format!("conceptlearn-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let kb_path = dir.join("family.nt");
    std::fs::write(&kb_path, FAMILY_NT).unwrap();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let app = router(
        Arc::new(Engine::from_file(&kb_path).map_err(|e| e.to_string())?),
        30.0,
    );
    let mut compared = 0;
    for (learner, seed) in [("celoe", 0u64), ("ocel", 0), ("evo", 1), ("evo", 42)] {
        for extras in [&[][..], &["--emit-sparql", "--verbalize"][..]] {
            let out = Command::new(env!("CARGO_BIN_EXE_conceptlearn"))
                .args([
                    "learn",
                    "--kb",
                    kb_path.to_str().unwrap(),
                    "--lp",
                    MARRIED_FEMALE_LP,
                ])
                .args([
                    "--learner",
                    learner,
                    "--seed",
                    &seed.to_string(),
                    "--output",
                    "json",
                ])
                .args(extras)
                .output()
                .map_err(|e| e.to_string())?;
            ensure!(
                out.status.success(),
                "CLI failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            let cli = String::from_utf8(out.stdout).unwrap();
            let body = serde_json::json!({
                "learning_problem": serde_json::from_str::<serde_json::Value>(MARRIED_FEMALE_LP).unwrap(),
                "learner": learner,
                "seed": seed,
                "emit_sparql": !extras.is_empty(),
                "verbalize": !extras.is_empty(),
            });
            let request = Request::post("/learn")
                .header("content-type", "application/json")
                .body(Body::from(body.to_string()))
                .unwrap();
            let http = rt.block_on(async {
                let resp = app.clone().oneshot(request).await.unwrap();
                let status = resp.status();
                (
                    status,
                    to_bytes(resp.into_body(), usize::MAX).await.unwrap(),
                )
            });
            ensure!(http.0.is_success(), "service returned {}", http.0);
            let http = String::from_utf8(http.1.to_vec()).unwrap();
            ensure!(
                hypotheses_part(&cli)? == hypotheses_part(&http)?,
                "{learner} seed {seed}: outputs differ\nCLI:\n{cli}\nHTTP:\n{http}"
            );
            compared += 1;
        }
    }
    Ok(format!(
        "{compared} runs byte-identical (celoe, ocel, evo; with and without extras)"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "married-female problem learned by CELOE",
            married_female_with_celoe,
        ),
        (
            "retrieval equals per-individual checks",
            retrieval_matches_point_checks,
        ),
        ("SPARQL parity and grammar validity", sparql_parity),
        ("refinements only specialize", refinement_soundness),
        (
            "search matches brute force up to length 5",
            learner_matches_brute_force,
        ),
        ("evolutionary learner reaches F1 = 1", evo_reaches_perfect),
        ("exact quality of Female", female_quality),
        (
            "CLI and service emit identical hypotheses",
            cli_and_service_agree,
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{}/8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

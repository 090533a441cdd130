//! The `conceptlearn` binary end to end.

use std::path::PathBuf;
use std::process::{Command, Output};

use conceptlearn_core::fixtures::{FAMILY_NT, MARRIED_FEMALE_LP};
use serde_json::Value;

fn fixture_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("conceptlearn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("family.nt"), FAMILY_NT).unwrap();
    std::fs::write(dir.join("lp.json"), MARRIED_FEMALE_LP).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conceptlearn"))
        .args(args)
        .env_remove(conceptlearn_cli::ENDPOINT_ENV)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn learns_figure_problem_as_json() {
    let d = fixture_dir();
    let kb = d.join("family.nt");
    let lp = d.join("lp.json");
    let out = run(&[
        "learn",
        "--kb",
        kb.to_str().unwrap(),
        "--lp",
        lp.to_str().unwrap(),
        "--learner",
        "celoe",
        "--output",
        "json",
    ]);
    let v = json(&out);
    let top = &v["hypotheses"][0];
    assert_eq!(top["f1"], Value::from(1.0));
    assert_eq!(top["accuracy"], Value::from(1.0));
    assert!(top["dl"].is_string() && top["manchester"].is_string() && top["length"].is_u64());
    assert!(top.get("sparql").is_none() && top.get("verbalization").is_none());
    assert!(v["stats"]["wall_ms"].is_u64());
}

#[test]
fn optional_fields_follow_flags() {
    let d = fixture_dir();
    let kb = d.join("family.nt");
    let out = run(&[
        "learn",
        "--kb",
        kb.to_str().unwrap(),
        "--lp",
        MARRIED_FEMALE_LP,
        "--learner",
        "ocel",
        "--output",
        "json",
        "--emit-sparql",
        "--verbalize",
        "--set",
        "top_k=3",
    ]);
    let v = json(&out);
    let hs = v["hypotheses"].as_array().unwrap();
    assert_eq!(hs.len(), 3);
    for h in hs {
        assert!(h["sparql"]
            .as_str()
            .unwrap()
            .contains("SELECT DISTINCT ?x WHERE"));
        assert!(!h["verbalization"].as_str().unwrap().is_empty());
    }
}

#[test]
fn evo_is_deterministic_per_seed() {
    let d = fixture_dir();
    let kb = d.join("family.nt");
    let args = [
        "learn",
        "--kb",
        kb.to_str().unwrap(),
        "--lp",
        MARRIED_FEMALE_LP,
        "--learner",
        "evo",
        "--output",
        "json",
        "--seed",
        "5",
    ];
    let a = json(&run(&args));
    let b = json(&run(&args));
    assert_eq!(a["hypotheses"], b["hypotheses"]);
    assert_eq!(a["stats"]["generations"], b["stats"]["generations"]);
}

#[test]
fn text_output_lists_ranked_hypotheses() {
    let d = fixture_dir();
    let kb = d.join("family.nt");
    let out = run(&[
        "learn",
        "--kb",
        kb.to_str().unwrap(),
        "--lp",
        MARRIED_FEMALE_LP,
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("1. "));
    assert!(text.contains("f1=1.0000"));
    assert!(text.contains("nodes expanded:"));
}

#[test]
fn exit_codes() {
    let d = fixture_dir();
    let kb = d.join("family.nt");
    let kb = kb.to_str().unwrap();
    let lp = MARRIED_FEMALE_LP;

    let code = |out: Output| {
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
        out.status.code().unwrap()
    };
    assert_eq!(code(run(&["learn", "--lp", lp])), 2);
    assert_eq!(
        code(run(&[
            "learn",
            "--kb",
            kb,
            "--endpoint",
            "http://localhost:1/",
            "--lp",
            lp
        ])),
        2
    );
    assert_eq!(
        code(run(&["learn", "--kb", kb, "--lp", lp, "--learner", "nope"])),
        2
    );
    assert_eq!(
        code(run(&[
            "learn",
            "--kb",
            kb,
            "--lp",
            lp,
            "--set",
            "bogus_field=1"
        ])),
        2
    );
    assert_eq!(
        code(run(&[
            "learn",
            "--kb",
            kb,
            "--lp",
            "{\"positive_examples\":[],\"negative_examples\":[]}"
        ])),
        2
    );

    let broken = d.join("broken.nt");
    std::fs::write(&broken, "<http://a> <http://b> .\n").unwrap();
    assert_eq!(
        code(run(&[
            "learn",
            "--kb",
            broken.to_str().unwrap(),
            "--lp",
            lp
        ])),
        3
    );
    assert_eq!(
        code(run(&[
            "learn",
            "--kb",
            d.join("absent.nt").to_str().unwrap(),
            "--lp",
            lp
        ])),
        3
    );

    let closed = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap();
    assert_eq!(
        code(run(&[
            "learn",
            "--endpoint",
            &format!("http://{closed}/sparql"),
            "--lp",
            lp
        ])),
        4
    );
}

#[test]
fn endpoint_comes_from_environment_when_no_kb() {
    let d = fixture_dir();
    let closed = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_conceptlearn"))
        .args(["learn", "--lp", MARRIED_FEMALE_LP])
        .env(
            conceptlearn_cli::ENDPOINT_ENV,
            format!("http://{closed}/sparql"),
        )
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    // an explicit --kb wins over the environment
    let out = Command::new(env!("CARGO_BIN_EXE_conceptlearn"))
        .args([
            "learn",
            "--kb",
            d.join("family.nt").to_str().unwrap(),
            "--lp",
            MARRIED_FEMALE_LP,
        ])
        .env(
            conceptlearn_cli::ENDPOINT_ENV,
            format!("http://{closed}/sparql"),
        )
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn compile_prints_query() {
    let d = fixture_dir();
    let out = run(&[
        "compile",
        "--kb",
        d.join("family.nt").to_str().unwrap(),
        "--expr",
        "Female and (married some Thing)",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        conceptlearn_testkit::sparql_grammar::validate(&text),
        Ok(())
    );
}

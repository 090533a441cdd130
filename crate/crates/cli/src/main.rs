use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conceptlearn_cli::service::{router, DEFAULT_RUNTIME_CAP_SECONDS};
use conceptlearn_cli::{AppError, Engine, LearnRequest, Learner, ENDPOINT_ENV};
use conceptlearn_core::{parse_expression, LearningProblem};
use conceptlearn_sparql::compile;
use serde_json::{Map, Value};

#[derive(Parser)]
#[command(
    name = "conceptlearn",
    version,
    about = "Learn OWL class expressions from positive and negative examples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn class expressions for one learning problem.
    Learn(LearnArgs),
    /// Serve POST /learn and GET /health over HTTP.
    Serve(ServeArgs),
    /// Print the SPARQL query for a Manchester-syntax class expression.
    Compile(CompileArgs),
}

#[derive(Args)]
struct Source {
    /// N-Triples ontology file.
    #[arg(long)]
    kb: Option<PathBuf>,
    /// SPARQL endpoint URL; defaults to $CONCEPTLEARN_ENDPOINT when --kb is absent.
    #[arg(long)]
    endpoint: Option<String>,
    /// Per-query timeout for the endpoint, in seconds.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    source: Source,
    /// Learning problem: a JSON file or inline JSON.
    #[arg(long)]
    lp: String,
    #[arg(long, value_enum, default_value_t = Learner::Celoe)]
    learner: Learner,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
    /// Attach the compiled SPARQL query to each hypothesis.
    #[arg(long)]
    emit_sparql: bool,
    /// Attach an English rendering to each hypothesis.
    #[arg(long)]
    verbalize: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON object of learner settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// One learner setting, `key=value`; the value is read as JSON when it parses.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for `--set max_runtime_seconds=S`.
    #[arg(long)]
    max_runtime: Option<f64>,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: String,
    /// Upper bound on any request's max_runtime_seconds.
    #[arg(long, default_value_t = DEFAULT_RUNTIME_CAP_SECONDS)]
    max_runtime_cap: f64,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    kb: PathBuf,
    /// Class expression in Manchester syntax.
    #[arg(long)]
    expr: String,
    /// Match named classes by their asserted members only.
    #[arg(long)]
    no_expand: bool,
}

fn load(source: &Source) -> Result<Engine, AppError> {
    let endpoint = source.endpoint.clone().or_else(|| {
        source
            .kb
            .is_none()
            .then(|| std::env::var(ENDPOINT_ENV).ok())
            .flatten()
    });
    match (&source.kb, endpoint) {
        (Some(_), Some(_)) => Err(AppError::Config(
            "give either --kb or --endpoint, not both".into(),
        )),
        (None, None) => Err(AppError::Config(format!(
            "no knowledge source: pass --kb FILE or --endpoint URL (or set {ENDPOINT_ENV})"
        ))),
        (Some(path), None) => Engine::from_file(path),
        (None, Some(url)) => {
            if !(source.timeout > 0.0 && source.timeout.is_finite()) {
                return Err(AppError::Config("--timeout must be positive".into()));
            }
            Engine::from_endpoint(&url, Duration::from_secs_f64(source.timeout))
        }
    }
}

fn read_problem(arg: &str) -> Result<LearningProblem, AppError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| AppError::Config(format!("{arg}: {e}")))?
    };
    LearningProblem::from_json(&text)
        .map_err(|e| AppError::Config(format!("learning problem: {e}")))
}

fn overrides(args: &LearnArgs) -> Result<Map<String, Value>, AppError> {
    let mut map = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
            match serde_json::from_str(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => {
                    return Err(AppError::Config(format!(
                        "{}: expected a JSON object",
                        path.display()
                    )))
                }
                Err(e) => return Err(AppError::Config(format!("{}: {e}", path.display()))),
            }
        }
        None => Map::new(),
    };
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| AppError::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.into()));
        map.insert(k.trim().into(), value);
    }
    if let Some(s) = args.max_runtime {
        map.insert("max_runtime_seconds".into(), s.into());
    }
    Ok(map)
}

fn run_learn(args: LearnArgs) -> Result<(), AppError> {
    let problem = read_problem(&args.lp)?;
    let mut request = LearnRequest::new(problem, args.learner);
    request.overrides = overrides(&args)?;
    request.seed = args.seed;
    request.emit_sparql = args.emit_sparql;
    request.verbalize = args.verbalize;
    // settings first, so configuration mistakes are reported before loading
    let settings =
        conceptlearn_cli::engine::settings(request.learner, &request.overrides, request.seed)?;
    let engine = load(&args.source)?;
    let report = engine.learn_with(&request, settings)?;
    match args.output {
        Output::Json => print!("{}", report.to_json()),
        Output::Text => print!("{}", report.to_text()),
    }
    Ok(())
}

fn run_serve(args: ServeArgs) -> Result<(), AppError> {
    if args.max_runtime_cap.is_nan() || args.max_runtime_cap <= 0.0 {
        return Err(AppError::Config(
            "--max-runtime-cap must be positive".into(),
        ));
    }
    let engine = Arc::new(load(&args.source)?);
    let app = router(engine, args.max_runtime_cap);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| AppError::Internal(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&args.bind)
            .await
            .map_err(|e| AppError::Config(format!("cannot bind {}: {e}", args.bind)))?;
        let addr = listener
            .local_addr()
            .map_err(|e| AppError::Internal(e.to_string()))?;
        eprintln!("listening on http://{addr}");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| AppError::Internal(e.to_string()))
    })
}

fn run_compile(args: CompileArgs) -> Result<(), AppError> {
    let engine = Engine::from_file(&args.kb)?;
    let kb = engine.backend().knowledge_base();
    let expr =
        parse_expression(&args.expr, &kb.symbols()).map_err(|e| AppError::Config(e.to_string()))?;
    println!(
        "{}",
        compile(&expr, engine.backend().hierarchy(), !args.no_expand).query_text
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Learn(a) => run_learn(a),
        Command::Serve(a) => run_serve(a),
        Command::Compile(a) => run_compile(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Operator tooling: ingest corpora, run single queries, compute analytics
//! over conversation logs, run red-team campaigns and serve the HTTP API.
//!
//! Exit codes: 0 success, 1 invalid input (bad flags, missing files,
//! unknown names), 2 internal failure. Reports go to stdout; logs go to
//! stderr.

mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::anyhow;
use chrono::{DateTime, NaiveDate, Utc};
use clap::{Parser, Subcommand};
use serde_json::json;
use shamba_core::analytics::redteam::parse_question_set;
use shamba_core::analytics::{
    metric_report, run_redteam_campaign, AnalyticsError, LexiconScreener, Metric, ReportContext,
    ScoringMode, TierFractions,
};
use shamba_core::config::{AppConfig, ConfigError};
use shamba_core::kb::{CollectionRegistry, Ingestor, KbError, Manifest};
use shamba_core::lexicon::Lexicon;
use shamba_core::pipeline::{Pipeline, PipelineError, UserQuery};
use shamba_core::provider::{LanguageTag, ProviderError, ProviderGateway};
use shamba_core::store::{read_log_file, StoreError, TimeRange};
use shamba_server::ServerError;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "shamba", version, about = "Agricultural advisory engine tooling")]
struct Cli {
    /// JSON configuration file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest every document of a manifest into a collection.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        /// Defaults to the manifest's collection id.
        #[arg(long)]
        collection: Option<String>,
    },
    /// Answer one query against a collection.
    Query {
        #[arg(long)]
        collection: String,
        #[arg(long)]
        text: String,
        /// Language tag; detected from the text when omitted.
        #[arg(long)]
        lang: Option<String>,
        #[arg(long)]
        crop: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        out: Format,
    },
    /// Serve the HTTP API.
    Serve,
    /// Compute a metric over a conversation log.
    Analyze {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long, value_enum, default_value = "text")]
        out: Format,
        /// Inclusive lower bound (RFC 3339 or YYYY-MM-DD).
        #[arg(long)]
        from: Option<String>,
        /// Exclusive upper bound (RFC 3339 or YYYY-MM-DD).
        #[arg(long)]
        to: Option<String>,
    },
    /// Run a red-team question set and score it with reviewer ratings.
    Redteam {
        #[arg(long)]
        questions: PathBuf,
        #[arg(long)]
        collection: String,
        /// JSON array of 0/1 ratings, one per question.
        #[arg(long)]
        ratings: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        out: Format,
    },
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
enum Failure {
    Invalid(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Internal(_) => 2,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Invalid(e) | Failure::Internal(e) => e,
        }
    }
}

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Invalid(e.into())
}

fn internal(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Internal(e.into())
}

impl From<ProviderError> for Failure {
    fn from(e: ProviderError) -> Self {
        match e {
            ProviderError::Validation(_) | ProviderError::Config(_) | ProviderError::Decode(_) => invalid(e),
            _ => internal(e),
        }
    }
}

impl From<KbError> for Failure {
    fn from(e: KbError) -> Self {
        match e {
            KbError::Provider(p) => p.into(),
            KbError::Index(_) => internal(e),
            _ => invalid(e),
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        invalid(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        invalid(e)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Validation(_) => invalid(e),
            PipelineError::Provider(p) => p.into(),
            PipelineError::Kb(k) => k.into(),
            other => internal(other),
        }
    }
}

impl From<AnalyticsError> for Failure {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Validation(_) => invalid(e),
            AnalyticsError::Pipeline(p) => p.into(),
            AnalyticsError::Provider(p) => p.into(),
            other => internal(other),
        }
    }
}

impl From<ServerError> for Failure {
    fn from(e: ServerError) -> Self {
        match e {
            ServerError::Config(c) => c.into(),
            ServerError::Kb(k) => k.into(),
            ServerError::Store(s) => s.into(),
            other => internal(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        internal(e)
    }
}

struct Engine {
    config: AppConfig,
    lexicon: Arc<Lexicon>,
    gateway: Arc<ProviderGateway>,
}

impl Engine {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let config = match path {
            Some(p) => AppConfig::load(p)?,
            None => AppConfig::default(),
        };
        let lexicon = Arc::new(config.lexicon()?);
        let gateway = Arc::new(config.gateway(Arc::clone(&lexicon))?);
        Ok(Self {
            config,
            lexicon,
            gateway,
        })
    }

    fn registry(&self) -> Result<CollectionRegistry, Failure> {
        Ok(CollectionRegistry::open(&self.config.data_dir)?)
    }

    fn pipeline(&self) -> Pipeline {
        Pipeline::new(
            Arc::clone(&self.gateway),
            Arc::clone(&self.lexicon),
            self.config.pipeline.clone(),
        )
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(anyhow!("{}: {e}", path.display())))
}

fn parse_instant(s: &str) -> Result<DateTime<Utc>, Failure> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc())
        .map_err(|_| invalid(anyhow!("`{s}` is not an RFC 3339 timestamp or YYYY-MM-DD date")))
}

fn emit(value: &serde_json::Value, format: Format) -> Result<(), Failure> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    output::write(value, format, &mut lock).map_err(internal)?;
    lock.flush()?;
    Ok(())
}

fn ingest(engine: &Engine, manifest: &Path, collection: Option<&str>) -> Result<(), Failure> {
    let manifest = Manifest::load(manifest)?;
    let registry = engine.registry()?;
    let ingestor = Ingestor::new(
        Arc::clone(&engine.gateway),
        Arc::clone(&engine.lexicon),
        engine.config.ingest.clone(),
    );
    let outcome = registry.ingest_manifest(&ingestor, &manifest, collection)?;
    for d in outcome.documents.iter().filter(|d| d.error.is_some()) {
        eprintln!(
            "document {} ({}): {}",
            d.index,
            d.doc_id.as_deref().unwrap_or("?"),
            d.error.as_deref().unwrap_or_default()
        );
    }
    let failures = outcome.failures();
    let total = outcome.documents.len();
    emit(
        &json!({"collection_id": outcome.collection_id, "documents": outcome.documents, "failures": failures}),
        Format::Json,
    )?;
    if total > 0 && failures == total {
        return Err(invalid(anyhow!("every document failed to ingest")));
    }
    Ok(())
}

fn query(
    engine: &Engine,
    collection: &str,
    text: &str,
    lang: Option<&str>,
    crop: Option<&str>,
    out: Format,
) -> Result<(), Failure> {
    let collection = engine.registry()?.get(collection)?;
    let mut q = UserQuery::detect("cli", text, &engine.lexicon)?.with_crop(crop);
    if let Some(tag) = lang {
        q.language = LanguageTag::parse(tag)?;
    }
    let r = engine.pipeline().answer(&q, &collection, &[])?;
    match out {
        Format::Text => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{}", r.response_text)?;
            if r.answered {
                if !r.citations.is_empty() {
                    writeln!(stdout, "sources: {}", r.citations.join(", "))?;
                }
                for f in &r.followups {
                    writeln!(stdout, "follow-up: {f}")?;
                }
            } else if let Some(c) = r.unanswered_category {
                writeln!(stdout, "unanswered: {c}")?;
            }
        }
        other => emit(&serde_json::to_value(&r).map_err(internal)?, other)?,
    }
    Ok(())
}

fn analyze(
    engine: &Engine,
    log: &Path,
    metric: &str,
    out: Format,
    from: Option<&str>,
    to: Option<&str>,
) -> Result<(), Failure> {
    let metric: Metric = metric.parse().map_err(|e: String| invalid(anyhow!(e)))?;
    let range = TimeRange {
        from: from.map(parse_instant).transpose()?,
        to: to.map(parse_instant).transpose()?,
    };
    let imported = read_log_file(log)?;
    let turns: Vec<_> = imported
        .turns()
        .into_iter()
        .filter(|t| range.contains(t.timestamp))
        .collect();
    let feedback = imported.feedback();
    let screener = LexiconScreener::builtin();
    let ctx = ReportContext {
        lexicon: &engine.lexicon,
        mode: ScoringMode::Provider(&engine.gateway),
        histogram_edges: &engine.config.histogram_edges,
        tiers: TierFractions::default(),
        screener: &screener,
    };
    let report = metric_report(metric, &turns, &feedback, ctx)?;
    let value = match out {
        Format::Json => json!({"metric": metric, "turns": turns.len(), "report": report}),
        _ => report.unwrap_or_else(|| json!({"turns": 0})),
    };
    emit(&value, out)
}

fn redteam(
    engine: &Engine,
    questions: &Path,
    collection: &str,
    ratings: Option<&Path>,
    out: Format,
) -> Result<(), Failure> {
    let questions = parse_question_set(&read_file(questions)?)?;
    let collection = engine.registry()?.get(collection)?;
    let mut campaign = run_redteam_campaign("cli", &questions, &engine.pipeline(), &collection)?;
    if let Some(path) = ratings {
        let ratings: Vec<u8> = serde_json::from_str(&read_file(path)?)
            .map_err(|e| invalid(anyhow!("{}: {e}", path.display())))?;
        campaign.apply_ratings(&ratings)?;
    }
    let by_category: serde_json::Map<String, serde_json::Value> = campaign
        .by_category()
        .into_iter()
        .map(|(c, s)| (c.as_str().to_string(), serde_json::to_value(s).expect("plain struct")))
        .collect();
    let summary = json!({
        "score": campaign.score(),
        "questions": campaign.results.len(),
        "answered": campaign.results.iter().filter(|r| r.answered).count(),
        "pending_review": campaign.results.iter().filter(|r| r.rating.is_none() || r.pending_review).count(),
        "by_category": by_category,
    });
    match out {
        Format::Json => emit(&json!({"summary": summary, "results": campaign.results}), out),
        other => emit(&summary, other),
    }
}

fn serve(engine: Engine) -> Result<(), Failure> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(shamba_server::serve(engine.config))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let engine = Engine::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest { manifest, collection } => ingest(&engine, &manifest, collection.as_deref()),
        Command::Query {
            collection,
            text,
            lang,
            crop,
            out,
        } => query(&engine, &collection, &text, lang.as_deref(), crop.as_deref(), out),
        Command::Serve => serve(engine),
        Command::Analyze {
            log,
            metric,
            out,
            from,
            to,
        } => analyze(&engine, &log, &metric, out, from.as_deref(), to.as_deref()),
        Command::Redteam {
            questions,
            collection,
            ratings,
            out,
        } => redteam(&engine, &questions, &collection, ratings.as_deref(), out),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error());
            ExitCode::from(f.code())
        }
    }
}

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use recast_core::explanation::{AttentionExplainer, OcclusionExplainer};
use recast_core::stats::labels::{analyze_labels, read_labels};
use recast_core::stats::{compare_explainers, compare_explainers_at};
use recast_core::{
    annotate, generate_span_alternatives, tokenize, BackendPaths, ReferenceBackend, Span,
    Thresholds,
};
use recast_service::{AlternativesResponse, ConfigOverrides, ScoreResponse};

#[derive(Parser)]
#[command(
    name = "recast",
    version,
    about = "Interactive toxicity interrogation engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API. RECAST_* environment variables override these flags.
    Serve(ServeArgs),
    /// Score a text and print per-token attention and highlights.
    Score(ScoreArgs),
    /// Suggest less toxic rewordings for a token span.
    Alternatives(AlternativesArgs),
    /// Summarize a labels file: Kendall tau-b and toxic-proportion intervals per condition.
    Stats(StatsArgs),
    /// Compare attention and occlusion explanations over a file of texts.
    Compare(CompareArgs),
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    feedback_log: Option<PathBuf>,
    /// Capacity of the feedback write queue.
    #[arg(long)]
    feedback_queue: Option<usize>,
    #[arg(long)]
    attn_cutoff: Option<f64>,
    #[arg(long)]
    alt_toxicity_max: Option<f64>,
    #[arg(long)]
    knn: Option<usize>,
    #[arg(long)]
    mlm_topk: Option<usize>,
    /// Allowed CORS origins, comma separated. Any origin is allowed when unset.
    #[arg(long, value_delimiter = ',')]
    cors_origins: Option<Vec<String>>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    attn_cutoff: f64,
    #[arg(long, default_value_t = 0.4)]
    alt_toxicity_max: f64,
    #[arg(long, default_value_t = 10)]
    knn: usize,
    #[arg(long, default_value_t = 20)]
    mlm_topk: usize,
}

impl ModelArgs {
    fn load(&self) -> Result<(ReferenceBackend, Thresholds)> {
        let thresholds = Thresholds {
            attn_cutoff: self.attn_cutoff,
            alt_toxicity_max: self.alt_toxicity_max,
            knn: self.knn,
            mlm_topk: self.mlm_topk,
        };
        thresholds.validate()?;
        let backend = ReferenceBackend::load(&BackendPaths {
            lexicon: self.lexicon.clone(),
            embeddings: self.embeddings.clone(),
            corpus: self.corpus.clone(),
        })
        .context("loading model files")?;
        Ok((backend, thresholds))
    }
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Text to score; `-` reads standard input.
    text: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AlternativesArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Text to edit; `-` reads standard input.
    text: String,
    /// First token of the span (0-based).
    #[arg(long)]
    start: usize,
    /// One past the last token; defaults to a single token.
    #[arg(long)]
    end: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct StatsArgs {
    /// Rows of `id, original_label, edit_label, condition`.
    #[arg(long)]
    labels: PathBuf,
    /// Field delimiter: a single character, or `tab`.
    #[arg(long, default_value = ",")]
    delimiter: String,
    /// Labels at or above this value count as toxic.
    #[arg(long, default_value_t = 4.0)]
    toxic_threshold: f64,
    #[arg(long, default_value_t = 1.96)]
    z: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// One text per line; blank lines are skipped.
    #[arg(long)]
    texts: PathBuf,
    /// Cutoff for occlusion scores. Calibrated to the attention cutoff's percentile when omitted.
    #[arg(long)]
    occlusion_cutoff: Option<f64>,
    #[arg(long)]
    json: bool,
}

fn read_text(arg: &str) -> Result<String> {
    if arg != "-" {
        return Ok(arg.to_string());
    }
    let mut s = String::new();
    io::stdin().read_to_string(&mut s)?;
    Ok(s)
}

fn parse_delimiter(s: &str) -> Result<u8> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => bail!("delimiter must be a single ASCII character or `tab`, got {s:?}"),
    }
}

fn serve(args: ServeArgs) -> Result<()> {
    let flags = ConfigOverrides {
        port: args.port,
        lexicon: args.lexicon,
        embeddings: args.embeddings,
        corpus: args.corpus,
        feedback_log: args.feedback_log,
        feedback_queue: args.feedback_queue,
        attn_cutoff: args.attn_cutoff,
        alt_toxicity_max: args.alt_toxicity_max,
        knn: args.knn,
        mlm_topk: args.mlm_topk,
        cors_origins: args.cors_origins,
    };
    let config = flags
        .merge(ConfigOverrides::from_env(std::env::vars())?)
        .into_config()?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(recast_service::serve(config))?;
    Ok(())
}

fn score(out: &mut dyn Write, args: ScoreArgs) -> Result<()> {
    let (backend, thresholds) = args.model.load()?;
    let doc = tokenize(&read_text(&args.text)?)?;
    let response = ScoreResponse::new(&doc, annotate(&doc, &backend, &thresholds)?);
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&response)?)?;
        return Ok(());
    }
    writeln!(out, "score {:.3}", response.score_0_100)?;
    for t in &response.tokens {
        let mark = if t.highlighted { "*" } else { " " };
        writeln!(out, "{mark} {:<20} {:.3}", t.text, t.attention)?;
    }
    Ok(())
}

fn alternatives(out: &mut dyn Write, args: AlternativesArgs) -> Result<()> {
    let (backend, thresholds) = args.model.load()?;
    let doc = tokenize(&read_text(&args.text)?)?;
    let span = Span::new(args.start, args.end.unwrap_or(args.start + 1));
    let set = generate_span_alternatives(&doc, span, &backend, &thresholds)?;
    let response = AlternativesResponse::from(set);
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&response)?)?;
        return Ok(());
    }
    writeln!(
        out,
        "{:?} scores {:.3}",
        doc.span_text(span)?,
        response.original_score_0_100
    )?;
    if response.candidates.is_empty() {
        writeln!(out, "no alternatives")?;
    }
    for c in &response.candidates {
        writeln!(
            out,
            "{:>8.3} {:>8.3}  {:<12} {:?}",
            c.resulting_score_0_100,
            c.individual_score_0_100,
            serde_json::to_value(c.source)?.as_str().unwrap_or_default(),
            c.replacement
        )?;
    }
    Ok(())
}

fn stats(out: &mut dyn Write, args: StatsArgs) -> Result<()> {
    let rows = read_labels(&args.labels, parse_delimiter(&args.delimiter)?)?;
    let report = analyze_labels(&rows, args.toxic_threshold, args.z)?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        write!(out, "{report}")?;
    }
    Ok(())
}

fn compare(out: &mut dyn Write, args: CompareArgs) -> Result<()> {
    let (backend, thresholds) = args.model.load()?;
    let contents = fs::read_to_string(&args.texts)
        .with_context(|| format!("reading {}", args.texts.display()))?;
    let texts: Vec<&str> = contents.lines().filter(|l| !l.trim().is_empty()).collect();
    let attention = AttentionExplainer(&backend);
    let occlusion = OcclusionExplainer(&backend);
    let report = match args.occlusion_cutoff {
        Some(c) => {
            compare_explainers_at(&texts, &attention, &occlusion, thresholds.attn_cutoff, c)?
        }
        None => compare_explainers(&texts, &attention, &occlusion, thresholds.attn_cutoff)?,
    };
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        return Ok(());
    }
    writeln!(
        out,
        "{} vs {} on {} texts ({} with no flags skipped)",
        report.method_a, report.method_b, report.texts, report.skipped
    )?;
    writeln!(
        out,
        "cutoffs          {:.4} / {:.4}",
        report.cutoff_a, report.cutoff_b
    )?;
    if let Some(c) = &report.calibration {
        writeln!(
            out,
            "calibrated at    percentile {:.4} (rank {})",
            c.source_percentile, c.rank
        )?;
    }
    writeln!(
        out,
        "mean overlap     {:.4} +/- {:.4}",
        report.mean_overlap, report.overlap_ci_halfwidth
    )?;
    writeln!(
        out,
        "mean latency     {:.3} ms / {:.3} ms",
        report.mean_latency_a.as_secs_f64() * 1e3,
        report.mean_latency_b.as_secs_f64() * 1e3
    )?;
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .init();
    let cli = Cli::parse();
    let stdout = io::stdout();
    let out = &mut stdout.lock();
    let result = match cli.command {
        Command::Serve(a) => serve(a),
        Command::Score(a) => score(out, a),
        Command::Alternatives(a) => alternatives(out, a),
        Command::Stats(a) => stats(out, a),
        Command::Compare(a) => compare(out, a),
    }
    .and_then(|()| Ok(out.flush()?));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

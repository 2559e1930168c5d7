use crate::api::router;
use crate::config::StoreConfig;
use crate::engine::{Analysis, ContextInput, Engine};
use crate::service::{CandidateView, Service};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nbiig_core::fusion::{export, fuse, ExportFormat};
use nbiig_core::realization::RealizerEndpoint;
use nbiig_core::recommender::{estimate_priors, PreferenceModel, SegmentKey};
use nbiig_core::table::{parse_csv, ChartKind, DataTable, TableContext};
use nbiig_corpus::io::{read_jsonl, PairRecord};
use nbiig_corpus::{build_corpus, BuildOptions, WebpageInstance};
use nbiig_eval::{evaluate, read_records};
use serde::Deserialize;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

#[derive(Debug, Parser)]
#[command(name = "nbiig", version, about = "Insight generation for business-intelligence tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate and print scored insight candidates for a CSV table.
    Insights(InsightsArgs),
    /// Fuse selected candidates into a report and export it.
    Report(ReportArgs),
    /// Build the RDF-to-text corpus from webpage instances.
    BuildCorpus(BuildCorpusArgs),
    /// Estimate segment type priors from matched pairs.
    Priors(PriorsArgs),
    /// Score predictions with BLEU, TER, chrF++ and PARENT.
    Eval(EvalArgs),
    /// Run the REST service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// CSV file; first column is the category or time axis.
    pub csv: PathBuf,
    /// Table title, the short context shown with the chart.
    #[arg(long, visible_alias = "title")]
    pub context: Option<String>,
    #[arg(long, default_value = "")]
    pub subject: String,
    /// line, column, bar, pie or none.
    #[arg(long, default_value = "none")]
    pub chart: ChartKind,
    /// The CSV has no header row.
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, env = "NBIIG_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "NBIIG_REALIZER_URL")]
    pub realizer_url: Option<String>,
    /// Recorded realizer responses, JSONL of {linearized, text}.
    #[arg(long, env = "NBIIG_REALIZER_FIXTURE")]
    pub realizer_fixture: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub realizer_timeout_ms: u64,
    /// Segment priors JSON from `nbiig priors`.
    #[arg(long, env = "NBIIG_PRIORS")]
    pub priors: Option<PathBuf>,
}

impl TableArgs {
    fn config(&self) -> StoreConfig {
        let mut cfg = StoreConfig::new(crate::config::DEFAULT_DATA_DIR);
        cfg.seed = self.seed;
        cfg.priors = self.priors.clone();
        let timeout = Duration::from_millis(self.realizer_timeout_ms);
        cfg.realizer = match (&self.realizer_fixture, &self.realizer_url) {
            (Some(path), _) => Some(RealizerEndpoint::fixture(path).with_timeout(timeout)),
            (None, Some(url)) => Some(RealizerEndpoint::live(url).with_timeout(timeout)),
            (None, None) => None,
        };
        cfg
    }

    fn load(&self) -> Result<(Engine, DataTable, TableContext, Analysis)> {
        let engine = Engine::new(&self.config())?;
        let bytes = std::fs::read(&self.csv).with_context(|| format!("reading {}", self.csv.display()))?;
        let table = parse_csv(&bytes, !self.no_header).with_context(|| format!("parsing {}", self.csv.display()))?;
        let title = match &self.context {
            Some(t) => t.clone(),
            None => default_title(&self.csv),
        };
        let ctx = engine.context(&ContextInput {
            title,
            subject: self.subject.clone(),
            chart_kind: self.chart,
        })?;
        let analysis = engine.analyze(&table, &ctx, &PreferenceModel::default());
        Ok((engine, table, ctx, analysis))
    }
}

fn default_title(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().replace(['_', '-'], " "))
        .filter(|s| !s.trim().is_empty())
        .unwrap_or_else(|| "Untitled table".into())
}

#[derive(Debug, Args)]
pub struct InsightsArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Print a JSON array instead of a listing.
    #[arg(long)]
    pub json: bool,
    /// Only the recommender's picks.
    #[arg(long)]
    pub recommended: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Candidate ids or 1-based positions in the `insights` listing, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub select: Vec<String>,
    /// plain or markdown.
    #[arg(long, default_value = "plain")]
    pub format: ExportFormat,
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildCorpusArgs {
    /// JSONL of {table, title, subject, summary}, or gold records {instance, labels}.
    pub instances: PathBuf,
    pub outdir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Augmentation targets per type.
    #[arg(long, default_value_t = nbiig_corpus::augment::DEFAULT_PER_TYPE_CAP)]
    pub per_type_cap: usize,
}

#[derive(Debug, Args)]
pub struct PriorsArgs {
    /// pairs.jsonl from `build-corpus`.
    pub pairs: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// JSONL of {prediction, references, linearized?}.
    pub records: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "NBIIG_HOST", default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "NBIIG_PORT", default_value_t = 8080)]
    pub port: u16,
}

/// Parses `argv` and runs the command. Usage errors exit 2, failures 1.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Insights(a) => insights(a),
        Command::Report(a) => report(a),
        Command::BuildCorpus(a) => build(a),
        Command::Priors(a) => priors(a),
        Command::Eval(a) => eval(a),
        Command::Serve(a) => serve(a),
    }
}

fn views(analysis: &Analysis, only_recommended: bool) -> Vec<CandidateView> {
    analysis
        .candidates
        .iter()
        .filter(|c| !only_recommended || analysis.recommended.contains(&c.id))
        .map(|c| CandidateView {
            candidate: c.clone(),
            linearized: c.triples.as_ref().map(|t| t.linearize()),
            recommended: analysis.recommended.contains(&c.id),
            selected: false,
        })
        .collect()
}

fn insights(a: InsightsArgs) -> Result<()> {
    let (_, _, _, analysis) = a.table.load()?;
    let views = views(&analysis, a.recommended);
    let mut out = std::io::stdout().lock();
    if a.json {
        serde_json::to_writer_pretty(&mut out, &views)?;
        writeln!(out)?;
        return Ok(());
    }
    for (i, v) in views.iter().enumerate() {
        let c = &v.candidate;
        let mark = if v.recommended { "*" } else { " " };
        writeln!(
            out,
            "{:>3}{mark} {:<11} {:.2}  {}  [{}]",
            i + 1,
            c.insight_type.as_str(),
            c.faithfulness,
            c.text,
            c.id
        )?;
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let (_, _, ctx, analysis) = a.table.load()?;
    let mut chosen = Vec::new();
    for token in &a.select {
        let token = token.trim();
        let found = match token.parse::<usize>() {
            Ok(n) if n >= 1 => analysis.candidates.get(n - 1),
            Ok(_) => None,
            Err(_) => analysis.candidates.iter().find(|c| c.id == token),
        };
        match found {
            Some(c) => chosen.push(c.clone()),
            None => bail!("no candidate {token:?}"),
        }
    }
    let report = fuse(&chosen, &ctx)?;
    let bytes = export(&report, a.format);
    match a.output {
        Some(path) => std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

/// A plain instance, or a gold record wrapping one.
#[derive(Deserialize)]
#[serde(untagged)]
enum InstanceLine {
    Labeled { instance: WebpageInstance },
    Plain(WebpageInstance),
}

fn build(a: BuildCorpusArgs) -> Result<()> {
    let lines: Vec<InstanceLine> = read_jsonl(&a.instances)?;
    let instances: Vec<WebpageInstance> = lines
        .into_iter()
        .map(|l| match l {
            InstanceLine::Labeled { instance } | InstanceLine::Plain(instance) => instance,
        })
        .collect();
    let opts = BuildOptions {
        seed: a.seed,
        per_type_cap: a.per_type_cap,
        ..BuildOptions::default()
    };
    let summary = build_corpus(&instances, &a.outdir, &opts)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn priors(a: PriorsArgs) -> Result<()> {
    let records: Vec<PairRecord> = read_jsonl(&a.pairs)?;
    let mut examples: Vec<(SegmentKey, Vec<_>)> = Vec::new();
    let mut skipped = 0usize;
    for r in records {
        match r.segment.clone() {
            Some(seg) => examples.push((seg, r.types.to_vec())),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        tracing::warn!(skipped, "pairs without a segment were skipped");
    }
    let table = estimate_priors(examples.iter().map(|(k, t)| (k, t.as_slice())));
    let json = serde_json::to_string_pretty(&table)? + "\n";
    match a.output {
        Some(path) => std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{json}"),
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let records = read_records(&a.records)?;
    let report = evaluate(&records)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_table());
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let cfg = StoreConfig::from_env()?;
    let service = Arc::new(Service::open(&cfg)?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let addr = format!("{}:{}", a.host, a.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        let addr = listener.local_addr()?;
        tracing::info!(%addr, data_dir = %cfg.data_dir.display(), "listening");
        axum::serve(listener, router(service))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(["nbiig", "frobnicate"]), 2);
        assert_eq!(run(["nbiig"]), 2);
    }

    #[test]
    fn missing_file_fails() {
        assert_eq!(run(["nbiig", "insights", "/nonexistent/x.csv"]), 1);
    }

    #[test]
    fn title_from_file_name() {
        assert_eq!(default_title(Path::new("/a/cheese_market-cap.csv")), "cheese market cap");
    }
}

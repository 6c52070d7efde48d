//! The `tagbrowse` command line.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tagbrowse::bench::{compare_strategies, run_trace_timed, BenchConfig};
use tagbrowse::simulator::generate_session;
use tagbrowse::synth::synthetic_document;
use tagbrowse::{Collection, SessionTrace, Strategy, StrategyCache, SynthParams};

use crate::api::{router, spawn_expiry, AppState};
use crate::session::SessionStore;

#[derive(Debug, Parser)]
#[command(name = "tagbrowse", version, about = "Tag-based browsing engine with state caches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a collection document and report its size.
    Ingest(IngestArgs),
    /// Write a seeded synthetic collection document.
    Synth(SynthArgs),
    /// Generate a random browsing session trace.
    Gen(GenArgs),
    /// Replay a trace under one strategy.
    Replay(ReplayArgs),
    /// Time strategies over many generated sessions.
    Bench(BenchArgs),
    /// Serve the REST API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub doc: PathBuf,
    /// Write the tag and inverted indexes as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2060)]
    pub resources: usize,
    #[arg(long, default_value_t = 300)]
    pub tags: usize,
    #[arg(long, default_value_t = 6.0)]
    pub mean_tags: f64,
    #[arg(long, default_value_t = 1.0)]
    pub skew: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Fan-out of a tag hierarchy; 0 for independent tags.
    #[arg(long, default_value_t = 0)]
    pub fanout: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub collection: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub actions: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub collection: PathBuf,
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, default_value = "resource")]
    pub strategy: Strategy,
    /// Write one state digest per line: the initial state, then one per action.
    #[arg(long)]
    pub digests: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub collection: PathBuf,
    /// `a..b`, `a..=b` or a single seed.
    #[arg(long, value_parser = parse_seeds, default_value = "0..500")]
    pub seeds: Range<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub actions: usize,
    #[arg(long, value_delimiter = ',', default_value = "query,resource")]
    pub strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Collection documents to serve; repeat for several.
    #[arg(long, required = true)]
    pub collection: Vec<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value_t = 30)]
    pub idle_minutes: u64,
}

/// Parses `a..b` (exclusive), `a..=b` (inclusive) or `a` (one seed).
pub fn parse_seeds(s: &str) -> Result<Range<u64>, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad seed `{t}`: {e}"));
    let range = if let Some((a, b)) = s.split_once("..=") {
        num(a)?..num(b)?.checked_add(1).ok_or("seed range overflows")?
    } else if let Some((a, b)) = s.split_once("..") {
        num(a)?..num(b)?
    } else {
        let a = num(s)?;
        a..a + 1
    };
    if range.is_empty() {
        return Err(format!("empty seed range `{s}`"));
    }
    Ok(range)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(args) => ingest(args, out),
        Command::Synth(args) => synth(args, out),
        Command::Gen(args) => gen(args, out),
        Command::Replay(args) => replay(args, out),
        Command::Bench(args) => bench(args, out),
        Command::Serve(args) => serve(args, out),
    }
}

fn load(path: &Path) -> anyhow::Result<Collection> {
    let (c, report) = Collection::load(path).with_context(|| format!("loading {}", path.display()))?;
    if !report.untagged.is_empty() {
        log::warn!("{}: {} resources carry no tags", path.display(), report.untagged.len());
    }
    if report.duplicate_tags_dropped > 0 {
        log::warn!(
            "{}: dropped {} repeated tag annotations",
            path.display(),
            report.duplicate_tags_dropped
        );
    }
    Ok(c)
}

#[derive(Serialize)]
struct IndexFile<'a> {
    name: &'a str,
    fingerprint: &'a str,
    resources: Vec<IndexedResource<'a>>,
    tags: Vec<IndexedTag<'a>>,
}

#[derive(Serialize)]
struct IndexedResource<'a> {
    id: u32,
    key: &'a str,
    label: &'a str,
}

#[derive(Serialize)]
struct IndexedTag<'a> {
    id: u32,
    label: &'a str,
    resources: Vec<u32>,
}

fn ingest(args: IngestArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let c = load(&args.doc)?;
    writeln!(out, "{} resources, {} tags", c.n_resources(), c.n_tags())?;
    if let Some(path) = args.out {
        let index = IndexFile {
            name: c.name(),
            fingerprint: c.fingerprint(),
            resources: c
                .resource_list()
                .iter()
                .map(|r| IndexedResource {
                    id: r.id.0,
                    key: &r.key,
                    label: &r.label,
                })
                .collect(),
            tags: c
                .tag_list()
                .iter()
                .map(|t| IndexedTag {
                    id: t.id.0,
                    label: &t.label,
                    resources: c.inverted(t.id).map(|s| s.iter().map(|r| r.0).collect()).unwrap_or_default(),
                })
                .collect(),
        };
        write_json(&path, &index)?;
    }
    Ok(())
}

fn synth(args: SynthArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let params = SynthParams {
        n_resources: args.resources,
        n_tags: args.tags,
        mean_tags_per_resource: args.mean_tags,
        skew: args.skew,
        seed: args.seed,
        hierarchy_fanout: args.fanout,
    };
    let doc = synthetic_document(&params)?;
    let (c, _) = Collection::ingest(&doc)?;
    write_json(&args.out, &c.to_document())?;
    writeln!(out, "{} resources, {} tags", c.n_resources(), c.n_tags())?;
    Ok(())
}

fn gen(args: GenArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let c = load(&args.collection)?;
    let trace = generate_session(&c, args.seed, args.actions);
    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    trace.write_jsonl(&c, BufWriter::new(file))?;
    write!(out, "{} actions", trace.actions.len())?;
    if trace.ended_early {
        write!(out, " (no legal action left)")?;
    }
    writeln!(out)?;
    Ok(())
}

fn read_trace(c: &Collection, path: &Path) -> anyhow::Result<SessionTrace> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    SessionTrace::read_jsonl(c, BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn replay(args: ReplayArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let c = load(&args.collection)?;
    let trace = read_trace(&c, &args.trace)?;
    let mut strategy = StrategyCache::new(args.strategy);
    let run = run_trace_timed(&c, &trace.actions, &mut strategy, 0)?;
    if let Some(path) = &args.digests {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        for (i, d) in run.digests.iter().enumerate() {
            writeln!(w, "{i} {}", d.hex())?;
        }
        w.flush()?;
    }
    let hits = run.hits.iter().filter(|&&h| h).count();
    writeln!(
        out,
        "{} actions, strategy {}, {} hits, {:.1} us cumulative",
        trace.actions.len(),
        args.strategy,
        hits,
        run.cumulative_us()
    )?;
    Ok(())
}

fn bench(args: BenchArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    if args.strategies.is_empty() {
        bail!("no strategies given");
    }
    let c = load(&args.collection)?;
    let config = BenchConfig {
        seeds: args.seeds.collect(),
        n_actions: args.actions,
        strategies: args.strategies,
        warmup: args.warmup,
        threads: args.threads,
        ..BenchConfig::default()
    };
    let outcome = compare_strategies(&c, &config)?;
    outcome.write_to_dir(&args.out)?;
    writeln!(out, "{} sessions written to {}", outcome.report.sessions.len(), args.out.display())?;
    if let Some(cmp) = &outcome.report.comparison {
        writeln!(
            out,
            "mean improvement {:.1}%, resource faster in {:.0}% of sessions",
            cmp.mean_improvement,
            100.0 * cmp.resource_faster_fraction
        )?;
        if let Some(w) = &cmp.wilcoxon {
            writeln!(out, "wilcoxon W = {}, Z = {:.3}, p = {:.3e}", w.w, w.z, w.p)?;
        }
    }
    Ok(())
}

fn serve(args: ServeArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let collections = args.collection.iter().map(|p| load(p)).collect::<anyhow::Result<Vec<_>>>()?;
    let store = SessionStore::new(Duration::from_secs(args.idle_minutes * 60));
    let state = AppState::new(collections, store);
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .with_context(|| format!("bad address {}:{}", args.host, args.port))?;

    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        writeln!(out, "listening on http://{}", listener.local_addr()?)?;
        out.flush()?;
        spawn_expiry(&state, Duration::from_secs(60));
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

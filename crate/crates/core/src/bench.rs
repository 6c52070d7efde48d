//! Timing harness for comparing update strategies over identical traces.
//!
//! Only the state update itself is timed: action validation, cache lookup
//! and store, and the set computations. Trace decoding, digesting and
//! reporting happen outside the measured region.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::browse::{self, StateDigest, UserAction};
use crate::cache::{CacheConfig, CacheStats};
use crate::collection::Collection;
use crate::error::{Error, Result};
use crate::simulator::{self, SessionTrace};
use crate::stats::{self, HistogramBin, WilcoxonResult};
use crate::strategy::{Strategy, StrategyCache, UpdateStrategy};

/// One timed replay of a trace.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub strategy: Strategy,
    /// Per-action update time in nanoseconds.
    pub durations_ns: Vec<u64>,
    pub cumulative_ns: u64,
    pub hits: Vec<bool>,
    pub stats: CacheStats,
    /// Initial state followed by the state after every action. Runs held
    /// in a [`BenchOutcome`] keep only the final digest once checked.
    pub digests: Vec<StateDigest>,
}

impl RunResult {
    pub fn cumulative_us(&self) -> f64 {
        self.cumulative_ns as f64 / 1_000.0
    }

    pub fn final_digest(&self) -> &StateDigest {
        self.digests.last().expect("digests include the initial state")
    }

    /// Running total of update time after each action, in microseconds.
    pub fn cumulative_series_us(&self) -> Vec<f64> {
        let mut total = 0u64;
        self.durations_ns
            .iter()
            .map(|d| {
                total += d;
                total as f64 / 1_000.0
            })
            .collect()
    }

    pub fn max_action_us(&self) -> f64 {
        self.durations_ns.iter().copied().max().unwrap_or(0) as f64 / 1_000.0
    }
}

/// Replays `actions` under `strategy`, timing every update.
///
/// `warmup` untimed replays run first; the strategy is restarted (caches
/// emptied) before each replay, so the recorded run starts cold.
pub fn run_trace_timed<S: UpdateStrategy + ?Sized>(
    c: &Collection,
    actions: &[UserAction],
    strategy: &mut S,
    warmup: usize,
) -> Result<RunResult> {
    let initial = browse::init_state(c);
    for _ in 0..warmup {
        simulator::replay_with(c, actions, strategy)?;
    }

    strategy.start(c, &initial);
    let mut state = initial;
    let mut durations_ns = Vec::with_capacity(actions.len());
    let mut hits = Vec::with_capacity(actions.len());
    let mut digests = Vec::with_capacity(actions.len() + 1);
    digests.push(state.digest());
    for (index, &action) in actions.iter().enumerate() {
        let started = Instant::now();
        let step = strategy.apply(c, &state, action);
        let elapsed = started.elapsed();
        let step = step.map_err(|e| Error::CorruptTrace { index, source: Box::new(e) })?;
        durations_ns.push(elapsed.as_nanos() as u64);
        hits.push(step.hit);
        state = step.state;
        digests.push(state.digest());
    }
    Ok(RunResult {
        strategy: strategy.strategy(),
        cumulative_ns: durations_ns.iter().sum(),
        durations_ns,
        hits,
        stats: strategy.stats(),
        digests,
    })
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub seeds: Vec<u64>,
    pub n_actions: usize,
    pub strategies: Vec<Strategy>,
    pub warmup: usize,
    pub cache: CacheConfig,
    /// Worker threads; every strategy of one seed runs on the same worker.
    pub threads: usize,
    pub histogram_bins: usize,
    pub bootstrap_resamples: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            seeds: (0..500).collect(),
            n_actions: 10_000,
            strategies: vec![Strategy::Query, Strategy::Resource],
            warmup: 1,
            cache: CacheConfig::UNBOUNDED,
            threads: 1,
            histogram_bins: 10,
            bootstrap_resamples: 2_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub strategy: Strategy,
    pub cumulative_us: f64,
    pub max_action_us: f64,
    pub stats: CacheStats,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SessionResult {
    pub seed: u64,
    pub actions: usize,
    pub ended_early: bool,
    pub runs: Vec<RunSummary>,
}

impl SessionResult {
    pub fn run(&self, strategy: Strategy) -> Option<&RunSummary> {
        self.runs.iter().find(|r| r.strategy == strategy)
    }
}

/// Query-cached versus resource-cached comparison over all sessions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Comparison {
    /// Per session, `100 · (query − resource) / query`.
    pub improvements: Vec<f64>,
    pub mean_improvement: f64,
    pub ci95: (f64, f64),
    pub min_improvement: f64,
    pub max_improvement: f64,
    pub histogram: Vec<HistogramBin>,
    /// Fraction of sessions where the resource strategy was faster.
    pub resource_faster_fraction: f64,
    /// Paired test on (query, resource) cumulative times; absent with fewer
    /// than five differing pairs.
    pub wilcoxon: Option<WilcoxonResult>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Environment {
    pub os: String,
    pub arch: String,
    pub cpu: Option<String>,
    pub logical_cpus: usize,
    pub memory_kib: Option<u64>,
    pub build: String,
    pub threads: usize,
}

impl Environment {
    pub fn detect(threads: usize) -> Self {
        let cpuinfo = std::fs::read_to_string("/proc/cpuinfo").unwrap_or_default();
        let meminfo = std::fs::read_to_string("/proc/meminfo").unwrap_or_default();
        Environment {
            os: std::env::consts::OS.to_owned(),
            arch: std::env::consts::ARCH.to_owned(),
            cpu: proc_field(&cpuinfo, "model name").map(str::to_owned),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            memory_kib: proc_field(&meminfo, "MemTotal")
                .and_then(|v| v.split_whitespace().next())
                .and_then(|v| v.parse().ok()),
            build: if cfg!(debug_assertions) { "debug" } else { "release" }.to_owned(),
            threads,
        }
    }
}

fn proc_field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find(|l| l.starts_with(key))
        .and_then(|l| l.split_once(':'))
        .map(|(_, v)| v.trim())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub collection: String,
    pub fingerprint: String,
    pub n_actions: usize,
    pub warmup: usize,
    pub strategies: Vec<Strategy>,
    pub sessions: Vec<SessionResult>,
    pub comparison: Option<Comparison>,
    pub environment: Environment,
}

/// Full per-seed output of a comparison, including the timed runs.
pub struct BenchOutcome {
    pub report: BenchReport,
    pub traces: Vec<SessionTrace>,
    /// `runs[i]` holds one run per configured strategy for `traces[i]`.
    pub runs: Vec<Vec<RunResult>>,
}

/// Generates one trace per seed and times every strategy on it.
pub fn compare_strategies(c: &Collection, config: &BenchConfig) -> Result<BenchOutcome> {
    compare_strategies_with(c, config, |s| StrategyCache::with_config(s, config.cache))
}

/// Like [`compare_strategies`] with caller-built strategy instances.
///
/// Every run's digest sequence is checked against the first strategy's
/// before anything is reported; a disagreement aborts with
/// [`Error::DigestMismatch`].
pub fn compare_strategies_with<S, F>(c: &Collection, config: &BenchConfig, make: F) -> Result<BenchOutcome>
where
    S: UpdateStrategy,
    F: Fn(Strategy) -> S + Sync,
{
    if config.seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    if config.strategies.is_empty() {
        return Err(Error::InvalidArgument("at least one strategy is required".into()));
    }

    let n = config.seeds.len();
    let results: Mutex<Vec<Option<SeedOutcome>>> = Mutex::new((0..n).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = config.threads.clamp(1, n);

    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= n {
            break;
        }
        let outcome = run_seed(c, config, config.seeds[i], &make);
        log::info!("seed {} done ({}/{n})", config.seeds[i], i + 1);
        let failed = outcome.is_err();
        results.lock().expect("no worker panicked")[i] = Some(outcome);
        if failed {
            // stop handing out new seeds
            next.store(n, Ordering::Relaxed);
        }
    };
    if workers == 1 {
        work();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(work);
            }
        });
    }

    let mut traces = Vec::with_capacity(n);
    let mut runs = Vec::with_capacity(n);
    for slot in results.into_inner().expect("no worker panicked") {
        match slot {
            Some(Ok((trace, r))) => {
                traces.push(trace);
                runs.push(r);
            }
            Some(Err(e)) => return Err(e),
            None => {}
        }
    }
    if traces.len() != n {
        return Err(Error::InvalidArgument("benchmark aborted".into()));
    }

    let report = assemble_report(c, config, &traces, &runs)?;
    Ok(BenchOutcome { report, traces, runs })
}

type SeedOutcome = Result<(SessionTrace, Vec<RunResult>)>;

fn run_seed<S, F>(c: &Collection, config: &BenchConfig, seed: u64, make: &F) -> SeedOutcome
where
    S: UpdateStrategy,
    F: Fn(Strategy) -> S,
{
    let trace = simulator::generate_session(c, seed, config.n_actions);
    let mut runs = Vec::with_capacity(config.strategies.len());
    for &strategy in &config.strategies {
        let mut instance = make(strategy);
        runs.push(run_trace_timed(c, &trace.actions, &mut instance, config.warmup)?);
    }
    check_digests(seed, &runs)?;
    for run in &mut runs {
        let last = run.digests.pop().expect("digests include the initial state");
        run.digests = vec![last];
    }
    Ok((trace, runs))
}

fn check_digests(seed: u64, runs: &[RunResult]) -> Result<()> {
    let reference = &runs[0].digests;
    for run in &runs[1..] {
        if let Some(step) = reference
            .iter()
            .zip(&run.digests)
            .position(|(a, b)| a != b)
            .or((reference.len() != run.digests.len()).then_some(reference.len().min(run.digests.len())))
        {
            return Err(Error::DigestMismatch { seed, step });
        }
    }
    Ok(())
}

fn assemble_report(
    c: &Collection,
    config: &BenchConfig,
    traces: &[SessionTrace],
    runs: &[Vec<RunResult>],
) -> Result<BenchReport> {
    let sessions: Vec<SessionResult> = traces
        .iter()
        .zip(runs)
        .map(|(trace, runs)| SessionResult {
            seed: trace.seed,
            actions: trace.actions.len(),
            ended_early: trace.ended_early,
            runs: runs
                .iter()
                .map(|r| RunSummary {
                    strategy: r.strategy,
                    cumulative_us: r.cumulative_us(),
                    max_action_us: r.max_action_us(),
                    stats: r.stats,
                })
                .collect(),
        })
        .collect();

    let has = |s| config.strategies.contains(&s);
    let comparison = if has(Strategy::Query) && has(Strategy::Resource) {
        Some(compare(&sessions, config)?)
    } else {
        None
    };

    Ok(BenchReport {
        collection: c.name().to_owned(),
        fingerprint: c.fingerprint().to_owned(),
        n_actions: config.n_actions,
        warmup: config.warmup,
        strategies: config.strategies.clone(),
        sessions,
        comparison,
        environment: Environment::detect(config.threads),
    })
}

fn compare(sessions: &[SessionResult], config: &BenchConfig) -> Result<Comparison> {
    let pairs: Vec<(f64, f64)> = sessions
        .iter()
        .map(|s| {
            let q = s.run(Strategy::Query).expect("query run").cumulative_us;
            let r = s.run(Strategy::Resource).expect("resource run").cumulative_us;
            (q, r)
        })
        .collect();
    let improvements = pairs
        .iter()
        .map(|&(q, r)| stats::improvement_percent(q, r))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = simulator::session_rng(0x5eed_b007);
    let ci95 = stats::bootstrap_mean_ci(&improvements, 0.95, config.bootstrap_resamples.max(1), &mut rng)?;
    let wilcoxon = match stats::wilcoxon_signed_rank(&pairs) {
        Ok(w) => Some(w),
        Err(Error::TooFewDifferences { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(Comparison {
        mean_improvement: stats::mean(&improvements),
        ci95,
        min_improvement: improvements.iter().copied().fold(f64::INFINITY, f64::min),
        max_improvement: improvements.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        histogram: stats::histogram(&improvements, config.histogram_bins.max(1))?,
        resource_faster_fraction: pairs.iter().filter(|(q, r)| r < q).count() as f64 / pairs.len() as f64,
        wilcoxon,
        improvements,
    })
}

impl BenchOutcome {
    /// Writes `bench.csv`, `report.json` and `cumulative.csv` (the per-action
    /// cumulative series of the first seed) into `dir`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.write_bench_csv(File::create(dir.join("bench.csv"))?)?;
        let mut json = BufWriter::new(File::create(dir.join("report.json"))?);
        serde_json::to_writer_pretty(&mut json, &self.report)?;
        json.write_all(b"\n")?;
        self.write_cumulative_csv(File::create(dir.join("cumulative.csv"))?)?;
        Ok(())
    }

    /// One row per (seed, strategy).
    pub fn write_bench_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["seed", "strategy", "actions", "cumulative_us", "hits", "lookups", "stores", "entries"])?;
        for session in &self.report.sessions {
            for run in &session.runs {
                w.write_record([
                    session.seed.to_string(),
                    run.strategy.to_string(),
                    session.actions.to_string(),
                    format!("{:.3}", run.cumulative_us),
                    run.stats.hits.to_string(),
                    run.stats.lookups.to_string(),
                    run.stats.stores.to_string(),
                    run.stats.entries.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_cumulative_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["action", "strategy", "cumulative_us"])?;
        if let Some(runs) = self.runs.first() {
            for run in runs {
                for (i, us) in run.cumulative_series_us().into_iter().enumerate() {
                    w.write_record([(i + 1).to_string(), run.strategy.to_string(), format!("{us:.3}")])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

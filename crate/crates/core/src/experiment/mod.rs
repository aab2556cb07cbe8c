//! The configuration matrix: baseline exclusion, parallel trial execution
//! into a resumable store, and the aggregate tables.

mod metrics;
mod report;
mod store;

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{run_trial, stable_seed, AgentBackend, Baseline, RemarkMode, TrialConfig};
use crate::kernel::Kernel;
use crate::remark::RemarkCategory;
use crate::validator::{Toolchain, ValidatorError};

pub use metrics::{compute_metrics, remark_delta, success_rate, Aggregation, DeltaRow, MetricsOptions, MetricsTable, RateRow};
pub use report::{compiler_label, format_delta, format_rate, mode_label, render_report, ReportFormat};
pub use store::{sha256_hex, ResultsStore, StoreRecord, StoreWriter, TrialKey, DRAFTS_DIR, ERRORS_FILE, RESULTS_FILE};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Validator(#[from] ValidatorError),
    #[error("store: {0}")]
    Store(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    /// Profile names; each must be known to the caller's toolchain map.
    pub compilers: Vec<String>,
    pub remark_modes: Vec<RemarkMode>,
    pub temperatures: Vec<f64>,
    pub trials_per_loop: u32,
    pub benchmark_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_lint_attempts")]
    pub max_lint_attempts: u32,
}

fn default_lint_attempts() -> u32 {
    3
}

impl ExperimentPlan {
    pub fn from_path(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        let mut plan: ExperimentPlan =
            serde_json::from_str(&text).map_err(|e| ExperimentError::InvalidPlan(format!("{}: {e}", path.display())))?;
        if plan.benchmark_dir.is_relative() {
            if let Some(parent) = path.parent() {
                plan.benchmark_dir = parent.join(&plan.benchmark_dir);
            }
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidPlan(m.to_string()));
        if self.trials_per_loop < 1 {
            return bad("trials_per_loop must be at least 1");
        }
        if self.temperatures.is_empty() {
            return bad("temperatures must not be empty");
        }
        if self.temperatures.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return bad("temperatures must be finite and non-negative");
        }
        if self.compilers.is_empty() || self.remark_modes.is_empty() {
            return bad("compilers and remark_modes must not be empty");
        }
        if self.max_lint_attempts < 1 {
            return bad("max_lint_attempts must be at least 1");
        }
        Ok(())
    }
}

/// `(benchmark, reason)` pairs.
pub type Unparsed = Vec<(String, String)>;

/// Kernels in `dir` (`*.c`, sorted by name). Files that do not parse are returned separately.
pub fn load_benchmarks(dir: &Path) -> Result<(Vec<Kernel>, Unparsed), ExperimentError> {
    let entries = std::fs::read_dir(dir).map_err(|e| ExperimentError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "c"))
        .collect();
    paths.sort();
    let mut kernels = Vec::new();
    let mut broken = Vec::new();
    for p in paths {
        match Kernel::from_path(&p) {
            Ok(k) => kernels.push(k),
            Err(e) => broken.push((benchmark_name_of(&p), e.to_string())),
        }
    }
    Ok((kernels, broken))
}

fn benchmark_name_of(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Benchmark identifier: the file stem.
pub fn benchmark_name(k: &Kernel) -> String {
    benchmark_name_of(Path::new(k.file_name()))
}

/// Persisted as `baseline-<compiler>.json` in the store directory.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BaselineReport {
    pub compiler: String,
    pub included: Vec<String>,
    /// Already vectorized by the unmodified compile.
    pub excluded: Vec<String>,
    /// Benchmarks that could not be parsed or compiled, with the reason.
    #[serde(default)]
    pub skipped: Vec<(String, String)>,
    /// Categories per included benchmark.
    #[serde(default)]
    pub categories: BTreeMap<String, Vec<RemarkCategory>>,
}

pub struct BaselineFilter {
    pub report: BaselineReport,
    /// Baselines of the included benchmarks, keyed by benchmark name.
    pub baselines: BTreeMap<String, Baseline>,
}

/// Compile every kernel unmodified and split off those the compiler already
/// vectorizes. A kernel whose original fails to compile is skipped.
pub fn baseline_filter(
    benchmarks: &[Kernel],
    compiler: &str,
    toolchain: &Toolchain,
    scratch: &Path,
) -> Result<BaselineFilter, ExperimentError> {
    if !benchmarks.is_empty() && !toolchain.available() {
        return Err(ValidatorError::ToolchainMissing(toolchain.profile.program().to_string()).into());
    }
    let mut report = BaselineReport { compiler: compiler.to_string(), ..Default::default() };
    let mut baselines = BTreeMap::new();
    for k in benchmarks {
        let name = benchmark_name(k);
        let dir = scratch.join(format!("baseline-{compiler}-{name}"));
        match Baseline::compute(k, toolchain, &dir) {
            Ok(b) if b.vectorized => report.excluded.push(name),
            Ok(b) => {
                report.categories.insert(name.clone(), b.categories_present(k));
                report.included.push(name.clone());
                baselines.insert(name, b);
            }
            Err(ValidatorError::CompileFailed { diagnostics }) => report.skipped.push((name, diagnostics)),
            Err(e) => return Err(e.into()),
        }
        let _ = std::fs::remove_dir_all(&dir);
    }
    Ok(BaselineFilter { report, baselines })
}

#[derive(Clone)]
pub struct RunOptions {
    pub store_dir: PathBuf,
    /// Toolchain per compiler name in the plan.
    pub toolchains: BTreeMap<String, Toolchain>,
    pub workers: usize,
    pub scratch_root: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunSummary {
    pub planned: usize,
    pub skipped_existing: usize,
    pub written: usize,
    /// Trials that errored before producing a record, with the error text.
    pub failed: Vec<(String, String)>,
    pub baselines: Vec<BaselineReport>,
}

struct Job<'a> {
    key: TrialKey,
    kernel: &'a Kernel,
    baseline: &'a Baseline,
    toolchain: &'a Toolchain,
}

enum JobResult {
    Done(StoreRecord, String),
    Failed(TrialKey, String),
    Aborted,
}

/// Run every trial of `plan` not already in the store at `opts.store_dir`.
/// Trials execute on `opts.workers` threads; records are appended in plan
/// order, so equal seeds and a deterministic backend give identical stores.
pub fn run_experiment(
    plan: &ExperimentPlan,
    backend: &dyn AgentBackend,
    opts: &RunOptions,
) -> Result<RunSummary, ExperimentError> {
    plan.validate()?;
    for c in &plan.compilers {
        if !opts.toolchains.contains_key(c) {
            return Err(ExperimentError::InvalidPlan(format!("no compiler profile named {c:?}")));
        }
    }
    std::fs::create_dir_all(&opts.scratch_root)
        .map_err(|e| ExperimentError::Io(format!("{}: {e}", opts.scratch_root.display())))?;
    let (kernels, broken) = load_benchmarks(&plan.benchmark_dir)?;
    for (name, err) in &broken {
        log::warn!("skipping benchmark {name}: {err}");
    }
    let existing: HashSet<TrialKey> = ResultsStore::load(&opts.store_dir)?.keys();
    let mut writer = StoreWriter::open(&opts.store_dir)?;

    let mut summary = RunSummary::default();
    let mut filters = Vec::new();
    for compiler in &plan.compilers {
        let tc = &opts.toolchains[compiler];
        let mut f = baseline_filter(&kernels, compiler, tc, &opts.scratch_root)?;
        f.report.skipped.extend(broken.iter().cloned());
        let path = opts.store_dir.join(format!("baseline-{compiler}.json"));
        let json = serde_json::to_string_pretty(&f.report).map_err(|e| ExperimentError::Store(e.to_string()))?;
        std::fs::write(&path, json + "\n").map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        log::info!(
            "{compiler}: {} included, {} excluded as already vectorized, {} skipped",
            f.report.included.len(),
            f.report.excluded.len(),
            f.report.skipped.len()
        );
        filters.push((compiler, tc, f));
    }

    let by_name: BTreeMap<String, &Kernel> = kernels.iter().map(|k| (benchmark_name(k), k)).collect();
    let mut jobs = Vec::new();
    for (compiler, tc, f) in &filters {
        for name in &f.report.included {
            for mode in &plan.remark_modes {
                for t in &plan.temperatures {
                    for trial in 0..plan.trials_per_loop {
                        summary.planned += 1;
                        let key = TrialKey::new(name, compiler, *mode, *t, trial);
                        if existing.contains(&key) {
                            summary.skipped_existing += 1;
                            continue;
                        }
                        jobs.push(Job { key, kernel: by_name[name], baseline: &f.baselines[name], toolchain: tc });
                    }
                }
            }
        }
    }
    summary.baselines = filters.iter().map(|(_, _, f)| f.report.clone()).collect();
    log::info!("{} trials planned, {} already stored, {} to run", summary.planned, summary.skipped_existing, jobs.len());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    let abort = AtomicBool::new(false);
    let total = jobs.len();
    let (tx, rx) = mpsc::channel::<(usize, JobResult)>();

    let write_result = std::thread::scope(|s| {
        let writer_thread = s.spawn(|| -> Result<(usize, Vec<(String, String)>), ExperimentError> {
            let mut pending: BTreeMap<usize, JobResult> = BTreeMap::new();
            let mut next = 0;
            let mut written = 0;
            let mut failed = Vec::new();
            for (i, r) in rx {
                pending.insert(i, r);
                while let Some(r) = pending.remove(&next) {
                    next += 1;
                    let res = match r {
                        JobResult::Done(rec, draft) => writer.append(&rec, &draft).map(|_| written += 1),
                        JobResult::Failed(key, msg) => {
                            log::error!("trial {key} failed: {msg}");
                            failed.push((key.to_string(), msg.clone()));
                            writer.append_error(&key, &msg)
                        }
                        JobResult::Aborted => Ok(()),
                    };
                    if let Err(e) = res {
                        abort.store(true, Ordering::Relaxed);
                        return Err(e);
                    }
                    if next % 50 == 0 || next == total {
                        log::info!("{next}/{total} trials done");
                    }
                }
            }
            Ok((written, failed))
        });

        pool.install(|| {
            jobs.par_iter().enumerate().for_each_with(tx, |tx, (i, job)| {
                let r = if abort.load(Ordering::Relaxed) {
                    JobResult::Aborted
                } else {
                    execute(job, plan, backend, &opts.scratch_root)
                };
                let _ = tx.send((i, r));
            });
        });
        writer_thread.join().expect("store writer panicked")
    });

    let (written, failed) = write_result?;
    summary.written = written;
    summary.failed = failed;
    Ok(summary)
}

fn execute(job: &Job<'_>, plan: &ExperimentPlan, backend: &dyn AgentBackend, scratch_root: &Path) -> JobResult {
    let k = &job.key;
    let mut cfg = TrialConfig::new(&k.benchmark, &k.compiler, k.remark_mode, k.temperature());
    cfg.trial_index = k.trial;
    cfg.max_lint_attempts = plan.max_lint_attempts;
    cfg.seed = stable_seed(plan.seed, &k.to_string());
    let scratch = match tempfile::Builder::new().prefix("trial-").tempdir_in(scratch_root) {
        Ok(d) => d,
        Err(e) => return JobResult::Failed(k.clone(), format!("scratch directory: {e}")),
    };
    match run_trial(job.kernel, &cfg, job.baseline, backend, job.toolchain, scratch.path()) {
        Ok(r) => JobResult::Done(StoreRecord::from_trial(&r), r.transformed_source),
        Err(e) => JobResult::Failed(k.clone(), e.to_string()),
    }
}

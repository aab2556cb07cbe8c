//! The `remark-forge` command line. Each `cmd_*` function returns the text
//! that the binary prints on stdout; logs go to stderr.

mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::agent::{run_trial, Baseline, HttpConfig, Outcome, RemarkMode, TrialConfig, TrialRecord};
use crate::dependence::{analyze_dependences_with, export_json, generate_precise_remarks, AnalysisOptions};
use crate::experiment::{compute_metrics, run_experiment, Aggregation, ExperimentPlan, ReportFormat, ResultsStore, RunOptions};
use crate::kernel::Kernel;
use crate::remark::{self, dedup, CategoryMap, ClangRecordParse};
use crate::validator::ValidatorError;

pub use config::{BackendConfig, GlobalConfig};

pub const NO_DEPENDENCES: &str = "(no loop-carried dependences)";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Toolchain(String),
    #[error("{0}")]
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Toolchain(_) => 3,
            CliError::Backend(_) => 4,
        }
    }
}

impl From<ValidatorError> for CliError {
    fn from(e: ValidatorError) -> Self {
        match e {
            ValidatorError::InvalidProfile(_) | ValidatorError::UnknownArrays(_) => CliError::Input(e.to_string()),
            _ => CliError::Toolchain(e.to_string()),
        }
    }
}

impl From<crate::experiment::ExperimentError> for CliError {
    fn from(e: crate::experiment::ExperimentError) -> Self {
        use crate::experiment::ExperimentError as E;
        match e {
            E::Validator(v) => v.into(),
            E::InvalidPlan(_) | E::Store(_) => CliError::Input(e.to_string()),
            E::Io(_) => CliError::Toolchain(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "remark-forge", version, about = "Compiler-remark feedback for agent-driven loop vectorization")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for `experiment`.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Use canned responses from this directory.
    #[arg(long, global = true, conflicts_with = "endpoint")]
    pub scripted: Option<PathBuf>,
    /// Use an OpenAI-compatible endpoint.
    #[arg(long, global = true, requires = "model")]
    pub endpoint: Option<String>,
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Raise log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print precise dependence remarks for a kernel.
    Analyze(AnalyzeArgs),
    /// Parse a compiler remark file into canonical JSON.
    Remarks(RemarksArgs),
    /// Run one refactoring trial and print its record.
    Trial(TrialArgs),
    /// Run an experiment plan into a results store.
    Experiment(ExperimentArgs),
    /// Render tables from a results store.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub kernel: PathBuf,
    #[arg(long, conflicts_with = "text")]
    pub json: bool,
    #[arg(long)]
    pub text: bool,
    /// Include loop-independent dependences.
    #[arg(long)]
    pub all_deps: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecordFormatArg {
    ClangYaml,
    IntelText,
}

#[derive(Debug, Args)]
pub struct RemarksArgs {
    pub record: PathBuf,
    #[arg(long, value_enum, default_value = "clang-yaml")]
    pub format: RecordFormatArg,
    /// Category mapping file replacing the built-in table.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrialArgs {
    pub kernel: PathBuf,
    #[arg(long, default_value = "clang")]
    pub compiler: String,
    #[arg(long, default_value = "stock")]
    pub mode: RemarkMode,
    #[arg(long, default_value_t = 0.2)]
    pub temperature: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub trial_index: u32,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub plan: PathBuf,
    /// Results store directory.
    #[arg(long, default_value = "results")]
    pub store: PathBuf,
    /// Overrides the plan seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AggregationArg {
    BenchmarkMean,
    Pooled,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub store: PathBuf,
    #[arg(long, default_value = "markdown")]
    pub format: ReportFormat,
    /// Overrides the configured aggregation.
    #[arg(long, value_enum)]
    pub aggregation: Option<AggregationArg>,
    #[arg(long)]
    pub exclude_backend_errors: bool,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Cli {
    /// The config file merged with flag overrides.
    pub fn resolve_config(&self) -> Result<GlobalConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => GlobalConfig::from_path(p)?,
            None => GlobalConfig::default(),
        };
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(dir) = &self.scripted {
            cfg.backend = Some(BackendConfig::Scripted { dir: dir.clone() });
        }
        if let (Some(endpoint), Some(model)) = (&self.endpoint, &self.model) {
            cfg.backend = Some(BackendConfig::Http(HttpConfig {
                endpoint: endpoint.clone(),
                model: model.clone(),
                retries: 3,
                timeout_secs: 300,
            }));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_kernel(path: &Path) -> Result<Kernel, CliError> {
    Kernel::from_path(path).map_err(|e| CliError::Input(e.to_string()))
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<String, CliError> {
    let k = load_kernel(&args.kernel)?;
    let deps = analyze_dependences_with(&k, &AnalysisOptions { include_loop_independent: args.all_deps });
    if args.json {
        return Ok(export_json(&deps) + "\n");
    }
    let remarks = generate_precise_remarks(&deps, &k);
    if remarks.is_empty() {
        return Ok(format!("{NO_DEPENDENCES}\n"));
    }
    Ok(remarks.iter().map(|r| r.text() + "\n").collect::<Vec<_>>().join("\n"))
}

pub fn cmd_remarks(args: &RemarksArgs) -> Result<String, CliError> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())));
    let text = read(&args.record)?;
    let map = match &args.mapping {
        Some(p) => CategoryMap::from_path(p).map_err(|e| CliError::Input(e.to_string()))?,
        None => CategoryMap::default(),
    };
    let remarks = match args.format {
        RecordFormatArg::ClangYaml => {
            let parsed = ClangRecordParse::parse(&text, &map);
            if parsed.malformed > 0 {
                log::warn!("{}: skipped {} malformed record(s)", args.record.display(), parsed.malformed);
            }
            parsed.remarks
        }
        RecordFormatArg::IntelText => remark::parse_intel_opt_report_with(&text, &map),
    };
    Ok(remark::export_json(&dedup(remarks).remarks) + "\n")
}

pub fn cmd_trial(args: &TrialArgs, cfg: &GlobalConfig) -> Result<TrialRecord, CliError> {
    let k = load_kernel(&args.kernel)?;
    let toolchain = cfg.toolchain(&args.compiler)?;
    if !toolchain.available() {
        return Err(ValidatorError::ToolchainMissing(toolchain.profile.program().to_string()).into());
    }
    let backend = cfg.backend()?;
    let root = cfg.scratch_root();
    std::fs::create_dir_all(&root).map_err(|e| CliError::Toolchain(format!("{}: {e}", root.display())))?;
    let scratch = tempfile::Builder::new()
        .prefix("remark-forge-")
        .tempdir_in(&root)
        .map_err(|e| CliError::Toolchain(e.to_string()))?;
    let baseline = Baseline::compute(&k, &toolchain, &scratch.path().join("baseline"))?;
    let bench = crate::experiment::benchmark_name(&k);
    let mut tc = TrialConfig::new(bench, &args.compiler, args.mode, args.temperature);
    tc.seed = args.seed;
    tc.trial_index = args.trial_index;
    run_trial(&k, &tc, &baseline, backend.as_ref(), &toolchain, scratch.path()).map_err(|e| match e {
        crate::agent::TrialError::Validator(v) => v.into(),
    })
}

/// Returns the store directory.
pub fn cmd_experiment(args: &ExperimentArgs, cfg: &GlobalConfig) -> Result<PathBuf, CliError> {
    let mut plan = ExperimentPlan::from_path(&args.plan)?;
    if let Some(seed) = args.seed {
        plan.seed = seed;
    }
    let backend = cfg.backend()?;
    let opts = RunOptions {
        store_dir: args.store.clone(),
        toolchains: cfg.toolchains(&plan.compilers)?,
        workers: cfg.workers,
        scratch_root: cfg.scratch_root().join("remark-forge-scratch"),
    };
    let summary = run_experiment(&plan, backend.as_ref(), &opts)?;
    log::info!(
        "{} planned, {} already stored, {} written, {} failed",
        summary.planned,
        summary.skipped_existing,
        summary.written,
        summary.failed.len()
    );
    if !summary.failed.is_empty() {
        log::warn!("{} trial(s) failed; see {}", summary.failed.len(), args.store.join(crate::experiment::ERRORS_FILE).display());
    }
    Ok(args.store.clone())
}

pub fn cmd_report(args: &ReportArgs, cfg: &GlobalConfig) -> Result<String, CliError> {
    if !args.store.is_dir() {
        return Err(CliError::Input(format!("{}: no such store directory", args.store.display())));
    }
    let store = ResultsStore::load(&args.store)?;
    let mut opts = cfg.metrics;
    if let Some(a) = args.aggregation {
        opts.aggregation = match a {
            AggregationArg::BenchmarkMean => Aggregation::BenchmarkMean,
            AggregationArg::Pooled => Aggregation::Pooled,
        };
    }
    opts.exclude_backend_errors |= args.exclude_backend_errors;
    Ok(crate::experiment::render_report(&compute_metrics(&store.records, &opts), args.format))
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let out = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a)?,
        Command::Remarks(a) => cmd_remarks(a)?,
        Command::Trial(a) => {
            let record = cmd_trial(a, &cli.resolve_config()?)?;
            let json = serde_json::to_string_pretty(&record).expect("trial record serializes");
            println!("{json}");
            if record.outcome == Outcome::BackendError {
                log::error!("backend error: {}", record.diagnostics);
                return Ok(4);
            }
            return Ok(0);
        }
        Command::Experiment(a) => cmd_experiment(a, &cli.resolve_config()?)?.display().to_string() + "\n",
        Command::Report(a) => {
            let text = cmd_report(a, &cli.resolve_config()?)?;
            match &a.out {
                Some(p) => {
                    std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                    format!("{}\n", p.display())
                }
                None => text,
            }
        }
    };
    print!("{out}");
    Ok(0)
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

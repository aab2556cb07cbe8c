//! The single-pass refactoring workflow: one remark-bearing prompt, a bounded
//! number of syntax-fix retries, then compile, differential test and a
//! vectorization check.

mod backend;
mod http;
mod prompt;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dependence::precise_remark_set;
use crate::kernel::{parse_kernel, Kernel};
use crate::remark::{detect_vectorized, LoopTarget, Remark, RemarkCategory, RemarkSet};
use crate::validator::{Lint, Toolchain, ValidatorError, Verdict};

pub use backend::{
    script_key, AgentBackend, BackendError, CompletionRequest, Message, RecordingBackend, Role, ScriptedBackend,
    SimRate, SimulatedBackend, SimulationConfig, TrialTag,
};
pub use http::{HttpBackend, HttpConfig, API_KEY_ENV};
pub use prompt::{build_prompt, extract_code, lint_retry_message, EmptyDraft, SYSTEM_PROMPT, TASK};

/// Which remarks the agent sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RemarkMode {
    None,
    Stock,
    Precise,
}

impl RemarkMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RemarkMode::None => "none",
            RemarkMode::Stock => "stock",
            RemarkMode::Precise => "precise",
        }
    }
}

impl fmt::Display for RemarkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RemarkMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(RemarkMode::None),
            "stock" => Ok(RemarkMode::Stock),
            "precise" => Ok(RemarkMode::Precise),
            other => Err(format!("unknown remark mode {other:?} (expected none, stock or precise)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    SyntaxFail,
    CompileFail,
    RunFail,
    NotVectorized,
    Vectorized,
    BackendError,
}

impl Outcome {
    pub const ALL: [Outcome; 6] = [
        Outcome::SyntaxFail,
        Outcome::CompileFail,
        Outcome::RunFail,
        Outcome::NotVectorized,
        Outcome::Vectorized,
        Outcome::BackendError,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    /// Compiler profile name.
    pub compiler: String,
    pub remark_mode: RemarkMode,
    pub temperature: f64,
    pub trial_index: u32,
    pub benchmark: String,
    pub max_lint_attempts: u32,
    pub seed: u64,
}

impl TrialConfig {
    pub fn new(benchmark: impl Into<String>, compiler: impl Into<String>, mode: RemarkMode, temperature: f64) -> Self {
        TrialConfig {
            compiler: compiler.into(),
            remark_mode: mode,
            temperature,
            trial_index: 0,
            benchmark: benchmark.into(),
            max_lint_attempts: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub config: TrialConfig,
    pub attempts: u32,
    pub outcome: Outcome,
    pub transformed_source: String,
    pub remarks_shown: Vec<Remark>,
    /// From the baseline compile plus precise analysis, whatever the mode.
    pub remark_categories_present: Vec<RemarkCategory>,
    pub differential: Option<Verdict>,
    /// Last lint, compile or backend message; empty on success.
    pub diagnostics: String,
    pub backend: String,
    pub wall_ms: u64,
}

#[derive(Debug, Error)]
pub enum TrialError {
    #[error(transparent)]
    Validator(#[from] ValidatorError),
}

/// Compile of the unmodified kernel; supplies the stock remarks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Baseline {
    pub remarks: RemarkSet,
    pub diagnostics: String,
    pub vectorized: bool,
}

impl Baseline {
    pub fn compute(kernel: &Kernel, toolchain: &Toolchain, scratch: &Path) -> Result<Baseline, ValidatorError> {
        let out = toolchain.compile_with_records(&kernel.source, kernel.file_name(), scratch)?;
        let vectorized = detect_vectorized(&out.remarks.remarks, &LoopTarget::of(kernel));
        Ok(Baseline { remarks: out.remarks, diagnostics: out.diagnostics, vectorized })
    }

    /// Categories attributed to this benchmark in per-remark statistics.
    pub fn categories_present(&self, kernel: &Kernel) -> Vec<RemarkCategory> {
        let mut cats = self.remarks.categories();
        for c in precise_remark_set(kernel).categories() {
            if !cats.contains(&c) {
                cats.push(c);
            }
        }
        cats
    }
}

fn is_dependence_category(c: &RemarkCategory) -> bool {
    matches!(
        c,
        RemarkCategory::UnsafeDependency
            | RemarkCategory::OutputDependence
            | RemarkCategory::AntiDependence
            | RemarkCategory::FlowDependence
    )
}

/// Remarks shown in `mode`. Precise mode swaps the compiler's dependence
/// remarks for the analysis-backed ones and keeps everything else.
pub fn remarks_for_mode(mode: RemarkMode, baseline: &RemarkSet, kernel: &Kernel) -> Option<RemarkSet> {
    match mode {
        RemarkMode::None => None,
        RemarkMode::Stock => Some(baseline.clone()),
        RemarkMode::Precise => {
            let mut remarks: Vec<Remark> =
                baseline.remarks.iter().filter(|r| !is_dependence_category(&r.category)).cloned().collect();
            remarks.extend(precise_remark_set(kernel).remarks);
            Some(crate::remark::dedup(remarks).with_origin(format!("precise+{}", baseline.origin)))
        }
    }
}

/// Stable 64-bit seed for `key` under `seed`.
pub fn stable_seed(seed: u64, key: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(key.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 8 bytes"))
}

/// Run one trial. Toolchain failures (missing compiler, broken reference
/// build) are errors; every draft-level failure is an [`Outcome`].
pub fn run_trial(
    kernel: &Kernel,
    cfg: &TrialConfig,
    baseline: &Baseline,
    backend: &dyn AgentBackend,
    toolchain: &Toolchain,
    scratch: &Path,
) -> Result<TrialRecord, TrialError> {
    let start = Instant::now();
    let shown = remarks_for_mode(cfg.remark_mode, &baseline.remarks, kernel);
    let mut messages = build_prompt(kernel, shown.as_ref(), Some(&baseline.diagnostics));
    let file_name = kernel.file_name();

    let mut record = TrialRecord {
        config: cfg.clone(),
        attempts: 0,
        outcome: Outcome::SyntaxFail,
        transformed_source: String::new(),
        remarks_shown: shown.map(|s| s.remarks).unwrap_or_default(),
        remark_categories_present: baseline.categories_present(kernel),
        differential: None,
        diagnostics: String::new(),
        backend: backend.identity(),
        wall_ms: 0,
    };
    let finish = |mut r: TrialRecord, outcome: Outcome, diagnostics: String| {
        r.outcome = outcome;
        r.diagnostics = diagnostics;
        r.wall_ms = start.elapsed().as_millis() as u64;
        Ok(r)
    };

    let mut draft = None;
    for attempt in 1..=cfg.max_lint_attempts.max(1) {
        record.attempts = attempt;
        let req = CompletionRequest {
            messages: messages.clone(),
            temperature: cfg.temperature,
            seed: Some(stable_seed(cfg.seed, &format!("attempt-{attempt}"))),
            tag: Some(TrialTag {
                benchmark: cfg.benchmark.clone(),
                mode: cfg.remark_mode,
                temperature: cfg.temperature,
                trial: cfg.trial_index,
                attempt,
            }),
        };
        let response = match backend.complete(&req) {
            Ok(r) => r,
            Err(e) => return finish(record, Outcome::BackendError, e.to_string()),
        };
        let (code, lint) = match extract_code(&response) {
            Ok(code) => {
                let lint = toolchain.lint(&code, file_name, scratch)?;
                (code, lint)
            }
            Err(e) => (String::new(), Lint::Diagnostics(e.to_string())),
        };
        record.transformed_source = code.clone();
        match lint {
            Lint::Clean => {
                draft = Some(code);
                break;
            }
            Lint::Diagnostics(d) => {
                record.diagnostics = d.clone();
                messages.push(Message::assistant(response));
                messages.push(lint_retry_message(&d));
            }
        }
    }
    let Some(draft) = draft else {
        let d = std::mem::take(&mut record.diagnostics);
        return finish(record, Outcome::SyntaxFail, d);
    };

    let compiled = match toolchain.compile_with_records(&draft, file_name, scratch) {
        Ok(c) => c,
        Err(ValidatorError::CompileFailed { diagnostics }) => {
            return finish(record, Outcome::CompileFail, diagnostics);
        }
        Err(e) => return Err(e.into()),
    };

    let verdict = toolchain.differential_test(kernel, &draft, scratch)?;
    let matched = verdict.is_match();
    record.differential = Some(verdict);
    if !matched {
        return finish(record, Outcome::RunFail, String::new());
    }

    let target = match parse_kernel(&draft, file_name) {
        Ok(k) => LoopTarget::of(&k),
        Err(_) => LoopTarget::function(kernel.name.clone()),
    };
    let outcome = if detect_vectorized(&compiled.remarks.remarks, &target) {
        Outcome::Vectorized
    } else {
        Outcome::NotVectorized
    };
    finish(record, outcome, String::new())
}

//! Real-compiler validation: syntax lint, optimizing compile with remark
//! capture, runner synthesis and differential testing.
//!
//! Every operation works inside a caller-provided scratch directory and never
//! writes anywhere else, so concurrent trials only need distinct directories.

mod process;
mod profile;
mod runner;

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::Kernel;
use crate::remark::{dedup, parse_clang_opt_record, parse_intel_opt_report, RemarkSet};

pub use process::tool_available;
pub use profile::{CompilerProfile, RecordFormat};
pub use runner::{checked_arrays, parse_checksums, synthesize_runner, RunnerSpec};

use process::{run, Finished};
use profile::expand;

pub const REL_TOLERANCE: f64 = 1e-6;
pub const ABS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidatorError {
    #[error("toolchain not found: {0}")]
    ToolchainMissing(String),
    #[error("compilation failed:\n{diagnostics}")]
    CompileFailed { diagnostics: String },
    #[error("kernel references undeclared arrays: {}", .0.join(", "))]
    UnknownArrays(Vec<String>),
    #[error("invalid compiler profile: {0}")]
    InvalidProfile(String),
    #[error("reference build failed: {0}")]
    ReferenceFailed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lint {
    Clean,
    Diagnostics(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileOutput {
    pub remarks: RemarkSet,
    /// Compiler warnings; empty for a quiet compile.
    pub diagnostics: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub array: Option<String>,
    pub expected: Option<f64>,
    pub actual: Option<f64>,
    pub rel_err: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Match,
    Mismatch(Mismatch),
}

impl Verdict {
    pub fn is_match(&self) -> bool {
        matches!(self, Verdict::Match)
    }

    fn failed(detail: impl Into<String>) -> Verdict {
        Verdict::Mismatch(Mismatch { array: None, expected: None, actual: None, rel_err: None, detail: detail.into() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeouts {
    #[serde(with = "secs")]
    pub compile: Duration,
    #[serde(with = "secs")]
    pub run: Duration,
}

impl Default for Timeouts {
    fn default() -> Self {
        Timeouts { compile: Duration::from_secs(60), run: Duration::from_secs(30) }
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_secs())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs(u64::deserialize(d)?))
    }
}

/// A compiler profile plus runner settings: everything a trial needs to validate drafts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Toolchain {
    pub profile: CompilerProfile,
    pub runner: RunnerSpec,
    pub timeouts: Timeouts,
}

fn fresh_dir(scratch: &Path, name: &str) -> Result<PathBuf, ValidatorError> {
    let dir = scratch.join(name);
    let io = |e: std::io::Error| ValidatorError::Io(format!("{}: {e}", dir.display()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).map_err(io)?;
    }
    std::fs::create_dir_all(&dir).map_err(io)?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<(), ValidatorError> {
    std::fs::write(path, text).map_err(|e| ValidatorError::Io(format!("{}: {e}", path.display())))
}

fn describe_failure(f: &Finished, limit: Duration) -> String {
    if f.timed_out {
        format!("timed out after {}s", limit.as_secs())
    } else {
        let mut s = f.stderr.trim_end().to_string();
        if s.is_empty() {
            s = match f.code {
                Some(c) => format!("exited with status {c}"),
                None => "terminated by signal".to_string(),
            };
        }
        s
    }
}

enum Run {
    Checksums(std::collections::BTreeMap<String, f64>),
    BuildFailed(String),
    Crashed(String),
}

impl Toolchain {
    pub fn new(profile: CompilerProfile, runner: RunnerSpec) -> Self {
        Toolchain { profile, runner, timeouts: Timeouts::default() }
    }

    pub fn clang(runner: RunnerSpec) -> Self {
        Self::new(CompilerProfile::clang(), runner)
    }

    pub fn available(&self) -> bool {
        tool_available(self.profile.program())
    }

    /// Syntax-only check. `file_name` names the file the compiler sees.
    pub fn lint(&self, src: &str, file_name: &str, scratch: &Path) -> Result<Lint, ValidatorError> {
        if src.trim().is_empty() {
            return Ok(Lint::Diagnostics(format!("{file_name}: empty source")));
        }
        let dir = fresh_dir(scratch, "lint")?;
        write(&dir.join(file_name), src)?;
        let argv = expand(&self.profile.lint_cmd, &[], &[("{src}", file_name)]);
        let f = run(&argv, &dir, self.timeouts.compile)?;
        Ok(if f.success() { Lint::Clean } else { Lint::Diagnostics(describe_failure(&f, self.timeouts.compile)) })
    }

    /// Optimizing compile with `vector_flags` and the record flag; returns the parsed remarks.
    pub fn compile_with_records(&self, src: &str, file_name: &str, scratch: &Path) -> Result<CompileOutput, ValidatorError> {
        let dir = fresh_dir(scratch, "compile")?;
        write(&dir.join(file_name), src)?;
        let record = match self.profile.record_format {
            RecordFormat::ClangYaml => "record.opt.yaml",
            RecordFormat::IntelText => "record.optrpt",
        };
        let mut flags = self.profile.vector_flags.clone();
        flags.extend(self.profile.record_flag.iter().cloned());
        let vars = [("{src}", file_name), ("{out}", "out.o"), ("{record}", record)];
        let argv = expand(&self.profile.compile_cmd, &flags, &vars);
        let f = run(&argv, &dir, self.timeouts.compile)?;
        if !f.success() {
            return Err(ValidatorError::CompileFailed { diagnostics: describe_failure(&f, self.timeouts.compile) });
        }
        let text = std::fs::read_to_string(dir.join(record)).unwrap_or_else(|_| {
            log::warn!("{} produced no optimization record", self.profile.name);
            String::new()
        });
        let remarks = match self.profile.record_format {
            RecordFormat::ClangYaml => parse_clang_opt_record(&text),
            RecordFormat::IntelText => parse_intel_opt_report(&text),
        };
        Ok(CompileOutput {
            remarks: dedup(remarks).with_origin(format!("{}:{file_name}", self.profile.name)),
            diagnostics: f.stderr.trim_end().to_string(),
        })
    }

    fn build_and_run(&self, program: &str, flags: &[String], dir: &Path) -> Result<Run, ValidatorError> {
        write(&dir.join("runner.c"), program)?;
        let argv = expand(&self.profile.link_cmd, flags, &[("{src}", "runner.c"), ("{out}", "runner")]);
        let built = run(&argv, dir, self.timeouts.compile)?;
        if !built.success() {
            return Ok(Run::BuildFailed(describe_failure(&built, self.timeouts.compile)));
        }
        let exe = dir.join("runner").display().to_string();
        let ran = run(&[exe], dir, self.timeouts.run)?;
        if !ran.success() {
            return Ok(Run::Crashed(describe_failure(&ran, self.timeouts.run)));
        }
        Ok(Run::Checksums(parse_checksums(&ran.stdout)))
    }

    /// Checksums of `source` (a variant of `original`) built with the given flags.
    pub fn checksums(&self, original: &Kernel, source: &str, vectorize: bool, scratch: &Path) -> Result<Result<std::collections::BTreeMap<String, f64>, String>, ValidatorError> {
        let dir = fresh_dir(scratch, if vectorize { "candidate" } else { "reference" })?;
        let flags = if vectorize { &self.profile.vector_flags } else { &self.profile.scalar_flags };
        let program = synthesize_runner(original, source, &self.runner)?;
        Ok(match self.build_and_run(&program, flags, &dir)? {
            Run::Checksums(c) => Ok(c),
            Run::BuildFailed(d) => Err(format!("build failed: {d}")),
            Run::Crashed(d) => Err(format!("run failed: {d}")),
        })
    }

    /// Original at scalar flags against `transformed` at vector flags.
    pub fn differential_test(&self, original: &Kernel, transformed: &str, scratch: &Path) -> Result<Verdict, ValidatorError> {
        let expected = self
            .checksums(original, &original.source, false, scratch)?
            .map_err(ValidatorError::ReferenceFailed)?;
        let actual = match self.checksums(original, transformed, true, scratch)? {
            Ok(c) => c,
            Err(detail) => return Ok(Verdict::failed(detail)),
        };
        Ok(compare(&checked_arrays(original), &expected, &actual))
    }
}

/// Per-array comparison at [`REL_TOLERANCE`] / [`ABS_TOLERANCE`].
pub fn compare(
    arrays: &[String],
    expected: &std::collections::BTreeMap<String, f64>,
    actual: &std::collections::BTreeMap<String, f64>,
) -> Verdict {
    for name in arrays {
        let Some(&e) = expected.get(name) else {
            return Verdict::failed(format!("reference printed no checksum for {name}"));
        };
        let Some(&a) = actual.get(name) else {
            return Verdict::failed(format!("candidate printed no checksum for {name}"));
        };
        let (ok, rel) = if a == e || (a.is_nan() && e.is_nan()) {
            (true, Some(0.0))
        } else if e == 0.0 {
            (a.abs() <= ABS_TOLERANCE, None)
        } else {
            let rel = (a - e).abs() / e.abs();
            (rel <= REL_TOLERANCE, Some(rel))
        };
        if !ok {
            return Verdict::Mismatch(Mismatch {
                array: Some(name.clone()),
                expected: Some(e),
                actual: Some(a),
                rel_err: rel,
                detail: format!("checksum of {name} differs: expected {e:.6e}, got {a:.6e}"),
            });
        }
    }
    Verdict::Match
}

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::agent::{Outcome, RemarkMode, TrialRecord};
use crate::remark::RemarkCategory;
use crate::validator::Verdict;

pub const RESULTS_FILE: &str = "results.jsonl";
pub const ERRORS_FILE: &str = "errors.jsonl";
pub const DRAFTS_DIR: &str = "drafts";

/// One line of `results.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreRecord {
    pub benchmark: String,
    pub compiler: String,
    pub remark_mode: RemarkMode,
    pub temperature: f64,
    pub trial: u32,
    pub attempts: u32,
    pub outcome: Outcome,
    pub remark_categories: Vec<RemarkCategory>,
    pub wall_ms: u64,
    /// Hash of the last draft; `None` when no draft was produced.
    pub draft_sha256: Option<String>,
    #[serde(default)]
    pub differential: Option<Verdict>,
    #[serde(default)]
    pub diagnostics: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrialKey {
    pub benchmark: String,
    pub compiler: String,
    pub remark_mode: RemarkMode,
    pub temperature_bits: u64,
    pub trial: u32,
}

impl TrialKey {
    pub fn new(benchmark: &str, compiler: &str, mode: RemarkMode, temperature: f64, trial: u32) -> Self {
        TrialKey {
            benchmark: benchmark.to_string(),
            compiler: compiler.to_string(),
            remark_mode: mode,
            temperature_bits: temperature.to_bits(),
            trial,
        }
    }

    pub fn temperature(&self) -> f64 {
        f64::from_bits(self.temperature_bits)
    }
}

impl std::fmt::Display for TrialKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}/{}/{}", self.benchmark, self.compiler, self.remark_mode, self.temperature(), self.trial)
    }
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl StoreRecord {
    pub fn key(&self) -> TrialKey {
        TrialKey::new(&self.benchmark, &self.compiler, self.remark_mode, self.temperature, self.trial)
    }

    pub fn from_trial(r: &TrialRecord) -> Self {
        let c = &r.config;
        StoreRecord {
            benchmark: c.benchmark.clone(),
            compiler: c.compiler.clone(),
            remark_mode: c.remark_mode,
            temperature: c.temperature,
            trial: c.trial_index,
            attempts: r.attempts,
            outcome: r.outcome,
            remark_categories: r.remark_categories_present.clone(),
            wall_ms: r.wall_ms,
            draft_sha256: (!r.transformed_source.is_empty()).then(|| sha256_hex(&r.transformed_source)),
            differential: r.differential.clone(),
            diagnostics: r.diagnostics.clone(),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> ExperimentError + '_ {
    move |e| ExperimentError::Io(format!("{}: {e}", path.display()))
}

/// Directory-backed, append-only trial store.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsStore {
    pub dir: PathBuf,
    pub records: Vec<StoreRecord>,
}

impl ResultsStore {
    /// Snapshot of the store in `dir`. A missing results file is an empty store;
    /// a torn final line (interrupted write) is ignored.
    pub fn load(dir: impl Into<PathBuf>) -> Result<Self, ExperimentError> {
        let dir = dir.into();
        let path = dir.join(RESULTS_FILE);
        let mut records = Vec::new();
        if path.exists() {
            let file = File::open(&path).map_err(io_err(&path))?;
            let lines: Vec<String> = BufReader::new(file).lines().collect::<Result<_, _>>().map_err(io_err(&path))?;
            let last = lines.len();
            for (n, line) in lines.into_iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str(&line) {
                    Ok(r) => records.push(r),
                    Err(e) if n + 1 == last => log::warn!("{}: ignoring torn last line ({e})", path.display()),
                    Err(e) => {
                        return Err(ExperimentError::Store(format!("{}:{}: {e}", path.display(), n + 1)));
                    }
                }
            }
        }
        Ok(ResultsStore { dir, records })
    }

    pub fn keys(&self) -> HashSet<TrialKey> {
        self.records.iter().map(StoreRecord::key).collect()
    }

    pub fn results_path(&self) -> PathBuf {
        self.dir.join(RESULTS_FILE)
    }

    pub fn draft_path(&self, sha: &str) -> PathBuf {
        self.dir.join(DRAFTS_DIR).join(format!("{sha}.c"))
    }
}

/// Appends records in the order given. Single owner; not shared between threads.
pub struct StoreWriter {
    dir: PathBuf,
    results: File,
    errors: Option<File>,
}

impl StoreWriter {
    pub fn open(dir: &Path) -> Result<Self, ExperimentError> {
        std::fs::create_dir_all(dir.join(DRAFTS_DIR)).map_err(io_err(dir))?;
        let path = dir.join(RESULTS_FILE);
        let mut results = OpenOptions::new().create(true).read(true).append(true).open(&path).map_err(io_err(&path))?;
        drop_torn_tail(&mut results, &path)?;
        Ok(StoreWriter { dir: dir.to_path_buf(), results, errors: None })
    }

    pub fn append(&mut self, record: &StoreRecord, draft: &str) -> Result<(), ExperimentError> {
        if let Some(sha) = &record.draft_sha256 {
            let path = self.dir.join(DRAFTS_DIR).join(format!("{sha}.c"));
            if !path.exists() {
                std::fs::write(&path, draft).map_err(io_err(&path))?;
            }
        }
        let mut line = serde_json::to_string(record).map_err(|e| ExperimentError::Store(e.to_string()))?;
        line.push('\n');
        let path = self.dir.join(RESULTS_FILE);
        self.results.write_all(line.as_bytes()).map_err(io_err(&path))?;
        self.results.flush().map_err(io_err(&path))
    }

    /// Trials that could not run at all. They stay out of `results.jsonl`, so a re-run retries them.
    pub fn append_error(&mut self, key: &TrialKey, message: &str) -> Result<(), ExperimentError> {
        let path = self.dir.join(ERRORS_FILE);
        if self.errors.is_none() {
            self.errors = Some(OpenOptions::new().create(true).append(true).open(&path).map_err(io_err(&path))?);
        }
        let line = serde_json::json!({"key": key.to_string(), "error": message}).to_string() + "\n";
        let f = self.errors.as_mut().expect("opened above");
        f.write_all(line.as_bytes()).map_err(io_err(&path))
    }
}

fn drop_torn_tail(file: &mut File, path: &Path) -> Result<(), ExperimentError> {
    use std::io::{Read, Seek, SeekFrom};
    let len = file.metadata().map_err(io_err(path))?.len();
    if len == 0 {
        return Ok(());
    }
    let mut text = Vec::new();
    file.seek(SeekFrom::Start(0)).map_err(io_err(path))?;
    file.read_to_end(&mut text).map_err(io_err(path))?;
    if text.last() != Some(&b'\n') {
        let keep = text.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1);
        file.set_len(keep as u64).map_err(io_err(path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(trial: u32) -> StoreRecord {
        StoreRecord {
            benchmark: "s241".into(),
            compiler: "clang".into(),
            remark_mode: RemarkMode::Stock,
            temperature: 0.2,
            trial,
            attempts: 1,
            outcome: Outcome::Vectorized,
            remark_categories: vec![RemarkCategory::UnsafeDependency],
            wall_ms: 5,
            draft_sha256: Some(sha256_hex("int x;")),
            differential: Some(Verdict::Match),
            diagnostics: String::new(),
        }
    }

    #[test]
    fn append_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = StoreWriter::open(dir.path()).unwrap();
        w.append(&rec(0), "int x;").unwrap();
        w.append(&rec(1), "int x;").unwrap();
        let store = ResultsStore::load(dir.path()).unwrap();
        assert_eq!(store.records, vec![rec(0), rec(1)]);
        assert_eq!(store.keys().len(), 2);
        assert_eq!(std::fs::read_to_string(store.draft_path(&sha256_hex("int x;"))).unwrap(), "int x;");
    }

    #[test]
    fn torn_tail_is_dropped_before_appending() {
        let dir = tempfile::tempdir().unwrap();
        let line = serde_json::to_string(&rec(0)).unwrap();
        std::fs::write(dir.path().join(RESULTS_FILE), format!("{line}\n{{\"benchm")).unwrap();
        assert_eq!(ResultsStore::load(dir.path()).unwrap().records.len(), 1);
        let mut w = StoreWriter::open(dir.path()).unwrap();
        w.append(&rec(1), "int x;").unwrap();
        assert_eq!(ResultsStore::load(dir.path()).unwrap().records, vec![rec(0), rec(1)]);
    }

    #[test]
    fn missing_store_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        assert!(ResultsStore::load(dir.path().join("nope")).unwrap().records.is_empty());
    }
}

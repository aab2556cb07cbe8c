use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{extract_code, stable_seed, RemarkMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Message { role: Role::Assistant, content: content.into() }
    }
}

/// Which trial a request belongs to. Offline backends key their answers on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTag {
    pub benchmark: String,
    pub mode: RemarkMode,
    pub temperature: f64,
    pub trial: u32,
    /// 1-based draft number within the trial.
    pub attempt: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub seed: Option<u64>,
    pub tag: Option<TrialTag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("backend returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("no scripted response for {0}")]
    Missing(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

/// A language model that turns a conversation into one reply.
pub trait AgentBackend: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError>;
    fn identity(&self) -> String;
}

impl<B: AgentBackend + ?Sized> AgentBackend for Box<B> {
    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        (**self).complete(req)
    }

    fn identity(&self) -> String {
        (**self).identity()
    }
}

impl<B: AgentBackend + ?Sized> AgentBackend for std::sync::Arc<B> {
    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        (**self).complete(req)
    }

    fn identity(&self) -> String {
        (**self).identity()
    }
}

fn tag_of(req: &CompletionRequest) -> Result<&TrialTag, BackendError> {
    req.tag.as_ref().ok_or_else(|| BackendError::Config("offline backends need a trial tag".into()))
}

/// Relative path of a response: `<benchmark>/<mode>/<temperature>/<trial>.txt`.
pub fn script_key(benchmark: &str, mode: RemarkMode, temperature: f64, trial: u32) -> String {
    format!("{benchmark}/{}/{temperature}/{trial}.txt", mode.as_str())
}

enum Script {
    Dir(PathBuf),
    Map(BTreeMap<String, String>),
}

/// Canned responses. For attempt `n` the file `<trial>.<n>.txt` is preferred
/// over `<trial>.txt`, so lint retries can be scripted.
pub struct ScriptedBackend {
    script: Script,
}

impl ScriptedBackend {
    pub fn from_dir(dir: impl Into<PathBuf>) -> Self {
        ScriptedBackend { script: Script::Dir(dir.into()) }
    }

    pub fn in_memory() -> Self {
        ScriptedBackend { script: Script::Map(BTreeMap::new()) }
    }

    /// Add a response under a [`script_key`]-style path (in-memory scripts only).
    pub fn with(mut self, key: impl Into<String>, response: impl Into<String>) -> Self {
        if let Script::Map(m) = &mut self.script {
            m.insert(key.into(), response.into());
        }
        self
    }

    fn lookup(&self, key: &str) -> Option<String> {
        match &self.script {
            Script::Dir(dir) => std::fs::read_to_string(dir.join(key)).ok(),
            Script::Map(m) => m.get(key).cloned(),
        }
    }
}

impl AgentBackend for ScriptedBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        let t = tag_of(req)?;
        let base = script_key(&t.benchmark, t.mode, t.temperature, t.trial);
        let per_attempt = format!("{}.{}.txt", base.trim_end_matches(".txt"), t.attempt);
        self.lookup(&per_attempt).or_else(|| self.lookup(&base)).ok_or(BackendError::Missing(base))
    }

    fn identity(&self) -> String {
        match &self.script {
            Script::Dir(d) => format!("scripted:{}", d.display()),
            Script::Map(_) => "scripted:memory".into(),
        }
    }
}

/// Success probability for trials matching every field that is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRate {
    #[serde(default)]
    pub benchmark: Option<String>,
    #[serde(default)]
    pub mode: Option<RemarkMode>,
    #[serde(default)]
    pub temperature: Option<f64>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Directory holding `<benchmark>.c` known-good rewrites.
    pub fix_dir: PathBuf,
    /// First matching rule wins.
    #[serde(default)]
    pub rates: Vec<SimRate>,
    #[serde(default)]
    pub default_p: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Bernoulli stand-in for a model: with probability `p` it answers with the
/// known-good rewrite, otherwise it echoes the original source back.
pub struct SimulatedBackend {
    pub config: SimulationConfig,
}

impl SimulatedBackend {
    pub fn new(config: SimulationConfig) -> Self {
        SimulatedBackend { config }
    }

    pub fn probability(&self, t: &TrialTag) -> f64 {
        self.config
            .rates
            .iter()
            .find(|r| {
                r.benchmark.as_ref().is_none_or(|b| *b == t.benchmark)
                    && r.mode.is_none_or(|m| m == t.mode)
                    && r.temperature.is_none_or(|x| x == t.temperature)
            })
            .map_or(self.config.default_p, |r| r.p)
    }
}

impl AgentBackend for SimulatedBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        let t = tag_of(req)?;
        let key = format!("{}/{}/{}/{}", t.benchmark, t.mode.as_str(), t.temperature, t.trial);
        let seed = stable_seed(self.config.seed ^ req.seed.unwrap_or(0), &key);
        let success = ChaCha8Rng::seed_from_u64(seed).gen_bool(self.probability(t).clamp(0.0, 1.0));
        let fix = self.config.fix_dir.join(format!("{}.c", t.benchmark));
        let body = match (success, std::fs::read_to_string(&fix)) {
            (true, Ok(fixed)) => fixed,
            _ => {
                let prompt = req.messages.iter().rev().find(|m| m.role == Role::User).map(|m| m.content.as_str());
                let original = prompt.and_then(|p| extract_code(p).ok()).unwrap_or_default();
                if original.is_empty() {
                    return Err(BackendError::Malformed("prompt carries no source block".into()));
                }
                original
            }
        };
        Ok(format!("```c\n{}\n```\n", body.trim_end()))
    }

    fn identity(&self) -> String {
        format!("simulated:seed={}", self.config.seed)
    }
}

/// Wraps a backend and keeps every request it forwards.
pub struct RecordingBackend<B> {
    inner: B,
    seen: Mutex<Vec<CompletionRequest>>,
}

impl<B: AgentBackend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend { inner, seen: Mutex::new(Vec::new()) }
    }

    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.seen.lock().expect("recording lock").clone()
    }
}

impl<B: AgentBackend> AgentBackend for RecordingBackend<B> {
    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        self.seen.lock().expect("recording lock").push(req.clone());
        self.inner.complete(req)
    }

    fn identity(&self) -> String {
        self.inner.identity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(benchmark: &str, mode: RemarkMode, attempt: u32) -> CompletionRequest {
        CompletionRequest {
            messages: vec![Message::user("fix this\n```c\nvoid k(void) {}\n```\n")],
            temperature: 0.2,
            seed: Some(7),
            tag: Some(TrialTag { benchmark: benchmark.into(), mode, temperature: 0.2, trial: 0, attempt }),
        }
    }

    #[test]
    fn scripted_prefers_attempt_specific_files() {
        let b = ScriptedBackend::in_memory()
            .with("s241/stock/0.2/0.txt", "generic")
            .with("s241/stock/0.2/0.2.txt", "second");
        assert_eq!(b.complete(&req("s241", RemarkMode::Stock, 1)).unwrap(), "generic");
        assert_eq!(b.complete(&req("s241", RemarkMode::Stock, 2)).unwrap(), "second");
        assert!(matches!(b.complete(&req("s241", RemarkMode::None, 1)), Err(BackendError::Missing(_))));
    }

    #[test]
    fn simulation_is_seeded_and_rule_driven() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("k.c"), "FIXED").unwrap();
        let sim = SimulatedBackend::new(SimulationConfig {
            fix_dir: dir.path().into(),
            rates: vec![SimRate { benchmark: None, mode: Some(RemarkMode::Stock), temperature: None, p: 1.0 }],
            default_p: 0.0,
            seed: 3,
        });
        assert_eq!(sim.complete(&req("k", RemarkMode::Stock, 1)).unwrap(), "```c\nFIXED\n```\n");
        assert_eq!(sim.complete(&req("k", RemarkMode::None, 1)).unwrap(), "```c\nvoid k(void) {}\n```\n");
    }

    #[test]
    fn half_rate_draws_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("k.c"), "FIXED").unwrap();
        let sim = SimulatedBackend::new(SimulationConfig {
            fix_dir: dir.path().into(),
            rates: vec![],
            default_p: 0.5,
            seed: 11,
        });
        let draws: Vec<bool> = (0..64)
            .map(|trial| {
                let mut r = req("k", RemarkMode::Stock, 1);
                r.tag.as_mut().unwrap().trial = trial;
                sim.complete(&r).unwrap().contains("FIXED")
            })
            .collect();
        let again: Vec<bool> = (0..64)
            .map(|trial| {
                let mut r = req("k", RemarkMode::Stock, 1);
                r.tag.as_mut().unwrap().trial = trial;
                sim.complete(&r).unwrap().contains("FIXED")
            })
            .collect();
        assert_eq!(draws, again);
        let hits = draws.iter().filter(|d| **d).count();
        assert!((16..=48).contains(&hits), "{hits}");
    }
}

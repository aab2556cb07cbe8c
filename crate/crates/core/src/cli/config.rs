use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{AgentBackend, HttpBackend, HttpConfig, ScriptedBackend, SimulatedBackend, SimulationConfig};
use crate::experiment::MetricsOptions;
use crate::validator::{CompilerProfile, RunnerSpec, Timeouts, Toolchain};

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendConfig {
    Http(HttpConfig),
    Scripted { dir: PathBuf },
    Simulation(SimulationConfig),
}

/// Contents of the `--config` file. Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlobalConfig {
    /// Extra or replacement compiler profiles; `clang` and `intel` are built in.
    pub profiles: Vec<CompilerProfile>,
    pub backend: Option<BackendConfig>,
    pub runner: RunnerSpec,
    pub timeouts: Timeouts,
    pub workers: usize,
    pub scratch_root: Option<PathBuf>,
    pub metrics: MetricsOptions,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        GlobalConfig {
            profiles: Vec::new(),
            backend: None,
            runner: RunnerSpec::default(),
            timeouts: Timeouts::default(),
            workers: 1,
            scratch_root: None,
            metrics: MetricsOptions::default(),
        }
    }
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl GlobalConfig {
    /// Relative paths inside the file are taken relative to the file's directory.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut cfg: GlobalConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        match &mut cfg.backend {
            Some(BackendConfig::Scripted { dir }) => rebase(base, dir),
            Some(BackendConfig::Simulation(sim)) => rebase(base, &mut sim.fix_dir),
            _ => {}
        }
        if let Some(s) = &mut cfg.scratch_root {
            rebase(base, s);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.workers < 1 {
            return Err(CliError::Input("workers must be at least 1".into()));
        }
        for p in &self.profiles {
            p.validate().map_err(|e| CliError::Input(e.to_string()))?;
        }
        Ok(())
    }

    pub fn profile(&self, name: &str) -> Result<CompilerProfile, CliError> {
        self.profiles
            .iter()
            .find(|p| p.name == name)
            .cloned()
            .or_else(|| CompilerProfile::by_name(name))
            .ok_or_else(|| CliError::Input(format!("unknown compiler profile {name:?}")))
    }

    pub fn toolchain(&self, name: &str) -> Result<Toolchain, CliError> {
        let mut tc = Toolchain::new(self.profile(name)?, self.runner);
        tc.timeouts = self.timeouts;
        Ok(tc)
    }

    pub fn toolchains(&self, names: &[String]) -> Result<BTreeMap<String, Toolchain>, CliError> {
        names.iter().map(|n| Ok((n.clone(), self.toolchain(n)?))).collect()
    }

    pub fn backend(&self) -> Result<Box<dyn AgentBackend>, CliError> {
        match &self.backend {
            None => Err(CliError::Input(
                "no backend configured (set \"backend\" in the config file, or pass --scripted or --endpoint)".into(),
            )),
            Some(BackendConfig::Http(h)) => {
                Ok(Box::new(HttpBackend::new(h.clone()).map_err(|e| CliError::Backend(e.to_string()))?))
            }
            Some(BackendConfig::Scripted { dir }) => Ok(Box::new(ScriptedBackend::from_dir(dir))),
            Some(BackendConfig::Simulation(sim)) => Ok(Box::new(SimulatedBackend::new(sim.clone()))),
        }
    }

    /// Scratch directory root; the system temp dir when unset.
    pub fn scratch_root(&self) -> PathBuf {
        self.scratch_root.clone().unwrap_or_else(std::env::temp_dir)
    }
}

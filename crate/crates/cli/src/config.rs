//! Engine configuration file.
//!
//! A single TOML document holds the agent roster, judge, debate and
//! aggregation settings and default paths. Relative paths are resolved
//! against the directory containing the file. Command-line flags override
//! file values; environment variables only carry backend credentials.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

use dxdebate::agents::{AgentKind, AgentProfile};
use dxdebate::dataset::DEFAULT_AUDIT_MARGIN;
use dxdebate::debate::DebateConfig;
use dxdebate::pairing::DEFAULT_QUALITY_EPSILON;
use dxdebate::pipeline::AraConfig;

fn default_parallelism() -> usize {
    4
}

fn default_margin() -> f64 {
    DEFAULT_AUDIT_MARGIN
}

fn default_epsilon() -> f64 {
    DEFAULT_QUALITY_EPSILON
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    #[serde(default)]
    pub agents: Vec<AgentProfile>,
    #[serde(default)]
    pub judge: Option<AgentProfile>,
    #[serde(default)]
    pub debate: DebateConfig,
    #[serde(default)]
    pub ara: AraConfig,
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_margin")]
    pub audit_margin: f64,
    #[serde(default = "default_epsilon")]
    pub quality_epsilon: f64,
    /// Per-agent probe k, keyed by agent id.
    #[serde(default)]
    pub probe_k: std::collections::BTreeMap<String, usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

fn resolve(base: &Path, path: &mut PathBuf) {
    if path.is_relative() {
        *path = base.join(&*path);
    }
}

fn resolve_profile(base: &Path, profile: &mut AgentProfile) {
    if let AgentKind::Scripted { fixtures } = &mut profile.kind {
        resolve(base, fixtures);
    }
}

impl EngineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config: EngineConfig =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for agent in &mut config.agents {
            resolve_profile(base, agent);
        }
        if let Some(judge) = &mut config.judge {
            resolve_profile(base, judge);
        }
        if let Some(d) = &mut config.dataset {
            resolve(base, d);
        }
        if let Some(o) = &mut config.output_dir {
            resolve(base, o);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for agent in &self.agents {
            agent.validate()?;
            anyhow::ensure!(
                seen.insert(&agent.id),
                "agent id '{}' appears twice",
                agent.id
            );
        }
        if let Some(judge) = &self.judge {
            judge.validate()?;
        }
        self.debate.validate()?;
        anyhow::ensure!(self.parallelism >= 1, "parallelism must be at least 1");
        Ok(())
    }

    pub fn agent(&self, id: &str) -> Option<&AgentProfile> {
        self.agents.iter().find(|a| a.id == id)
    }
}

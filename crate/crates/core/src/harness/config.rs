use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::direct::DirectParams;
use crate::engine::EngineConfig;
use crate::error::{NemoError, Result};
use crate::neuro::SsneConfig;
use crate::workload::Split;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeciesKind {
    Continuous,
    Floor,
    Gcn,
    GraphUnet,
}

impl SpeciesKind {
    pub const ALL: [SpeciesKind; 4] = [Self::Continuous, Self::Floor, Self::Gcn, Self::GraphUnet];

    pub fn name(self) -> &'static str {
        match self {
            Self::Continuous => "continuous",
            Self::Floor => "floor",
            Self::Gcn => "gcn",
            Self::GraphUnet => "graph_unet",
        }
    }
}

/// Bundled reference network or a workload file.
#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadSource {
    Tiny,
    Small,
    File(PathBuf),
}

impl WorkloadSource {
    pub fn parse(s: &str) -> Self {
        match s {
            "tiny" => Self::Tiny,
            "small" => Self::Small,
            path => Self::File(PathBuf::from(path)),
        }
    }
}

fn default_species() -> Vec<SpeciesKind> {
    SpeciesKind::ALL.to_vec()
}

fn default_workload() -> String {
    "tiny".into()
}

fn one() -> usize {
    1
}

fn default_split() -> Split {
    Split::Evaluation
}

/// Everything a `search` run needs. Missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default = "default_species")]
    pub species: Vec<SpeciesKind>,
    /// `tiny`, `small`, or a path to a workload file.
    #[serde(default = "default_workload")]
    pub workload: String,
    /// Seed for training a bundled workload.
    #[serde(default)]
    pub workload_seed: u64,
    #[serde(default)]
    pub bit_set: BitSet,
    #[serde(default = "one")]
    pub top_k: usize,
    #[serde(default = "one")]
    pub threads: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_split")]
    pub split: Split,
    #[serde(default)]
    pub direct: DirectParams,
    #[serde(default)]
    pub ssne: SsneConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| NemoError::config(format!("run config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| NemoError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| NemoError::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.species.is_empty() {
            return Err(NemoError::config("species roster is empty"));
        }
        for (i, s) in self.species.iter().enumerate() {
            if self.species[..i].contains(s) {
                return Err(NemoError::config(format!("species `{}` listed twice", s.name())));
            }
        }
        if self.threads == 0 {
            return Err(NemoError::config("threads must be at least 1"));
        }
        if self.top_k == 0 {
            return Err(NemoError::config("top_k must be at least 1"));
        }
        self.ssne.validate()?;
        self.engine.validate(self.species.len())
    }

    pub fn workload_source(&self) -> WorkloadSource {
        WorkloadSource::parse(&self.workload)
    }

    /// Engine settings with the run seed applied.
    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig { seed: self.seed, ..self.engine.clone() }
    }
}

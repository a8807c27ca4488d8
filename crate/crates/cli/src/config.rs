//! Run configuration: defaults, overridden by the `--config` file, overridden
//! by flags.

use std::path::Path;

use liftcode::design::Trials;
use liftcode::expansion::CriteriaConfig;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::failure::Failure;
use crate::input::{load_criteria, load_structured, sha256_hex};

pub const DEFAULT_STAGES: usize = 3;
pub const DEFAULT_TRIALS: Trials = Trials::Random(16);
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_MAX_WEIGHT: usize = 8;
pub const DEFAULT_FRAMES: u64 = 100_000;
pub const DEFAULT_EPS: [f64; 5] = [0.5, 0.4, 0.3, 0.2, 0.1];

/// Keys accepted in the `--config` TOML file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub stages: Option<usize>,
    pub trials: Option<Trials>,
    pub max_weight: Option<usize>,
    pub k_max: Option<usize>,
    pub budget: Option<u64>,
    pub eps: Option<Vec<f64>>,
    pub frames: Option<u64>,
    pub stop_after: Option<u64>,
    pub criteria: Option<CriteriaConfig>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        match path {
            Some(p) => load_structured(p),
            None => Ok(FileConfig::default()),
        }
    }

    pub fn criteria(&self, flag: Option<&Path>) -> Result<CriteriaConfig, Failure> {
        let cfg = match flag {
            Some(p) => load_criteria(p)?,
            None => self.criteria.clone().unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn eps(&self, flag: Vec<f64>) -> Vec<f64> {
        if !flag.is_empty() {
            flag
        } else {
            self.eps.clone().unwrap_or_else(|| DEFAULT_EPS.to_vec())
        }
    }
}

/// Resolved settings of one run, echoed into every output and hashed.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved<T: Serialize> {
    pub command: &'static str,
    #[serde(flatten)]
    pub settings: T,
}

impl<T: Serialize> Resolved<T> {
    pub fn new(command: &'static str, settings: T) -> Self {
        Resolved { command, settings }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("settings serialize")
    }

    pub fn sha256(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("settings serialize"))
    }

    pub fn provenance(&self, seed: Option<u64>) -> Value {
        json!({
            "tool": "liftcode",
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "config_sha256": self.sha256(),
            "config": self.to_value(),
        })
    }
}

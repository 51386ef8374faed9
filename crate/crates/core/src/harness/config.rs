use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineConfig;
use crate::error::{Error, Result};
use crate::executor::{DualSignal, ExecConfig};
use crate::policy::{ArchConfig, NormStats};
use crate::schedule::Requirements;
use crate::trainer::{EvalSetting, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub count_train: usize,
    pub count_test: usize,
    /// Inclusive range for the number of agents per graph.
    pub n_min: usize,
    pub n_max: usize,
    pub radius_factor: f64,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            count_train: 10,
            count_test: 50,
            n_min: 200,
            n_max: 300,
            radius_factor: 1.2,
            seed: 0,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count_train < 1 || self.count_test < 1 {
            return Err(Error::Config("dataset counts must be >= 1".into()));
        }
        if self.n_min < 2 || self.n_min > self.n_max {
            return Err(Error::Config(format!(
                "dataset node range {}..={} must satisfy 2 <= n_min <= n_max",
                self.n_min, self.n_max
            )));
        }
        if !(self.radius_factor > 0.0) {
            return Err(Error::Config("dataset.radius_factor must be > 0".into()));
        }
        Ok(())
    }
}

/// Execution settings shared by every requirement level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSpec {
    pub deltas: Vec<f64>,
    /// Resilience slack per entry of `deltas`.
    pub resilience: Vec<f64>,
    #[serde(rename = "T")]
    pub steps: usize,
    pub eta_dual: f64,
    pub dual_signal: DualSignal,
    pub norm_stats: NormStats,
}

impl Default for EvalSpec {
    fn default() -> Self {
        Self {
            deltas: vec![0.1, 0.125, 0.15],
            resilience: vec![0.05, 0.1, 0.1],
            steps: 200,
            eta_dual: 2.0,
            dual_signal: DualSignal::Binary,
            norm_stats: NormStats::default(),
        }
    }
}

impl EvalSpec {
    pub fn settings(&self) -> Vec<EvalSetting> {
        self.deltas
            .iter()
            .zip(&self.resilience)
            .map(|(&delta, &resilience)| EvalSetting {
                delta,
                exec: ExecConfig {
                    steps: self.steps,
                    eta_dual: self.eta_dual,
                    resilience,
                    dual_signal: self.dual_signal,
                    norm_stats: self.norm_stats,
                },
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.deltas.is_empty() {
            return Err(Error::Config("eval.deltas must not be empty".into()));
        }
        if self.deltas.len() != self.resilience.len() {
            return Err(Error::Config(format!(
                "eval.resilience has {} entries but eval.deltas has {}",
                self.resilience.len(),
                self.deltas.len()
            )));
        }
        for s in self.settings() {
            if !(s.delta > 0.0 && s.delta <= 1.0) {
                return Err(Error::Config(format!("requirement {} must be in (0, 1]", s.delta)));
            }
            s.exec.validate(&Requirements::uniform(1, s.delta)?)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSpec {
    #[serde(rename = "T")]
    pub steps: usize,
    pub seed: u64,
    pub p_exponent: f64,
}

impl Default for BaselineSpec {
    fn default() -> Self {
        Self {
            steps: 200,
            seed: 0,
            p_exponent: 1.0,
        }
    }
}

impl BaselineSpec {
    pub fn variants(&self) -> Vec<BaselineConfig> {
        BaselineConfig::all_variants(self.steps, self.seed)
            .into_iter()
            .map(|mut c| {
                c.p_exponent = self.p_exponent;
                c
            })
            .collect()
    }
}

/// Everything one experiment needs, loadable from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub dataset: DatasetSpec,
    pub arch: ArchConfig,
    pub train: TrainConfig,
    pub eval: EvalSpec,
    pub baseline: BaselineSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("runs/default"),
            dataset: DatasetSpec::default(),
            arch: ArchConfig::default(),
            train: TrainConfig::default(),
            eval: EvalSpec::default(),
            baseline: BaselineSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        self.arch.validate()?;
        self.train.validate()?;
        self.eval.validate()?;
        if self.baseline.steps < 1 {
            return Err(Error::Config("baseline.T must be >= 1".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::parse(path, m),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }
}

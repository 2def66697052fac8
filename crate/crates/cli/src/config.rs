//! Benchmark configuration: TOML file plus command-line overrides.

use georent_core::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// Model vocabulary, mirroring the benchmark column naming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Ols,
    Nngp,
    RfNonSpatial,
    RfCoordinates,
    RfSar,
    RfSarCoordinates,
    RfSi,
    RfEsf,
    RfEsfApp,
    Gbt,
    Mlp,
}

pub const MODEL_NAMES: [(&str, Model); 11] = [
    ("ols", Model::Ols),
    ("nngp", Model::Nngp),
    ("rf_non_spatial", Model::RfNonSpatial),
    ("rf_coordinates", Model::RfCoordinates),
    ("rf_sar", Model::RfSar),
    ("rf_sar_coordinates", Model::RfSarCoordinates),
    ("rf_si", Model::RfSi),
    ("rf_esf", Model::RfEsf),
    ("rf_esf_app", Model::RfEsfApp),
    ("gbt", Model::Gbt),
    ("mlp", Model::Mlp),
];

impl Model {
    pub fn parse(s: &str) -> Result<Model> {
        MODEL_NAMES
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, m)| *m)
            .ok_or_else(|| {
                let vocab: Vec<&str> = MODEL_NAMES.iter().map(|(n, _)| *n).collect();
                Error::Config(format!(
                    "unknown model '{s}'; expected one of: {}",
                    vocab.join(", ")
                ))
            })
    }

    pub fn name(&self) -> &'static str {
        MODEL_NAMES.iter().find(|(_, m)| m == self).unwrap().0
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source")]
pub enum DataConfig {
    /// Property CSV with the documented 11-column schema.
    Csv { path: PathBuf },
    /// Seeded synthetic generator.
    Synthetic {
        #[serde(default = "default_sigma2")]
        sigma2: f64,
        #[serde(default = "default_phi")]
        phi: f64,
        #[serde(default = "default_tau2")]
        tau2: f64,
        #[serde(default)]
        nonlinear: f64,
    },
}

fn default_sigma2() -> f64 {
    0.1
}
fn default_phi() -> f64 {
    0.5
}
fn default_tau2() -> f64 {
    0.02
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig::Synthetic {
            sigma2: default_sigma2(),
            phi: default_phi(),
            tau2: default_tau2(),
            nonlinear: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NngpConfig {
    /// Conditioning-set size for both fitting and prediction.
    pub neighbors: usize,
    pub alphas: Vec<f64>,
    pub phis: Vec<f64>,
    pub folds: usize,
}

impl Default for NngpConfig {
    fn default() -> Self {
        NngpConfig {
            neighbors: 30,
            alphas: vec![0.05, 0.2, 0.5],
            phis: vec![0.25, 0.5, 1.0],
            folds: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RfConfig {
    pub n_trees: usize,
    pub node_size: usize,
    /// mtry candidates for CV tuning; values above the feature count are
    /// clamped.
    pub mtry: Vec<usize>,
    pub folds: usize,
}

impl Default for RfConfig {
    fn default() -> Self {
        RfConfig {
            n_trees: 100,
            node_size: 5,
            mtry: vec![4, 14, 28],
            folds: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SarConfig {
    /// Neighbors in the row-standardized weight matrix.
    pub k: usize,
    /// Also append spatially lagged covariate columns.
    pub lag_covariates: bool,
}

impl Default for SarConfig {
    fn default() -> Self {
        SarConfig {
            k: 10,
            lag_covariates: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SiConfig {
    /// Nearest observations fed as (value, distance) pairs.
    pub k: usize,
}

impl Default for SiConfig {
    fn default() -> Self {
        SiConfig { k: 10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EsfConfig {
    /// Eigenvector budget; only positive-eigenvalue columns are used.
    pub h: usize,
}

impl Default for EsfConfig {
    fn default() -> Self {
        EsfConfig { h: 200 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtConfig {
    pub nround: usize,
    pub eta: Vec<f64>,
    pub max_depth: Vec<usize>,
    pub colsample_bytree: Vec<f64>,
    pub min_child_weight: Vec<f64>,
    pub subsample: Vec<f64>,
    pub gamma: f64,
    pub lambda: f64,
    pub folds: usize,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            nround: 100,
            eta: vec![0.1, 0.2],
            max_depth: vec![9, 11, 13],
            colsample_bytree: vec![0.8, 1.0],
            min_child_weight: vec![0.8, 1.0],
            subsample: vec![0.8, 1.0],
            gamma: 0.0,
            lambda: 1.0,
            folds: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    pub depths: Vec<usize>,
    pub widths: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub optimizers: Vec<georent_core::mlp::Optimizer>,
    pub epochs: usize,
    pub trials: usize,
    pub folds: usize,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            depths: vec![1, 2],
            widths: vec![16, 64],
            learning_rates: vec![1e-3, 1e-2],
            batch_sizes: vec![128],
            optimizers: vec![georent_core::mlp::Optimizer::Adam],
            epochs: 30,
            trials: 4,
            folds: 2,
        }
    }
}

/// How the runtime_s column is filled. `Zero` makes outputs byte-reproducible
/// across machines and runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeMode {
    #[default]
    Measured,
    Zero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub sample_sizes: Vec<usize>,
    pub split_ratio: f64,
    /// Model names from the fixed vocabulary.
    pub models: Vec<String>,
    pub runtime: RuntimeMode,
    pub data: DataConfig,
    pub nngp: NngpConfig,
    pub rf: RfConfig,
    pub rf_sar: SarConfig,
    pub rf_si: SiConfig,
    pub esf: EsfConfig,
    pub gbt: GbtConfig,
    pub mlp: MlpConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            seed: 1,
            out_dir: PathBuf::from("results"),
            sample_sizes: vec![1000],
            split_ratio: 0.8,
            models: vec!["ols".into()],
            runtime: RuntimeMode::Measured,
            data: DataConfig::default(),
            nngp: NngpConfig::default(),
            rf: RfConfig::default(),
            rf_sar: SarConfig::default(),
            rf_si: SiConfig::default(),
            esf: EsfConfig::default(),
            gbt: GbtConfig::default(),
            mlp: MlpConfig::default(),
        }
    }
}

/// rf_esf relies on a dense eigendecomposition and is restricted to sizes
/// at or below this cap.
pub const ESF_EXACT_CAP: usize = 10_000;

impl BenchmarkConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: BenchmarkConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{path:?}: {e}")))?;
        Ok(config)
    }

    /// Resolved model list; fails fast on names outside the vocabulary.
    pub fn model_list(&self) -> Result<Vec<Model>> {
        if self.models.is_empty() {
            return Err(Error::Config("no models requested".into()));
        }
        self.models.iter().map(|s| Model::parse(s)).collect()
    }

    pub fn validate(&self) -> Result<Vec<Model>> {
        let models = self.model_list()?;
        if self.sample_sizes.is_empty() {
            return Err(Error::Config("sample_sizes must be non-empty".into()));
        }
        if !(0.0 < self.split_ratio && self.split_ratio < 1.0) {
            return Err(Error::Config(format!(
                "split_ratio must be in (0, 1), got {}",
                self.split_ratio
            )));
        }
        if models.contains(&Model::RfEsf) {
            if let Some(&n) = self.sample_sizes.iter().find(|&&n| n > ESF_EXACT_CAP) {
                return Err(Error::Capacity(format!(
                    "rf_esf requested at n = {n}, above the dense cap {ESF_EXACT_CAP}; use rf_esf_app"
                )));
            }
        }
        Ok(models)
    }
}

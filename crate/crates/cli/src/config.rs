use std::path::{Path, PathBuf};

use nftmarket::predict::ExperimentSpec;
use nftmarket::synth::SynthConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

/// Run configuration, read from TOML and then overridden by flags.
///
/// ```toml
/// seed = 7
/// out = "out"
///
/// [inputs]
/// trades = ["exports/opensea.csv", "exports/atomic.jsonl"]
/// rates = "exports/rates.csv"
/// ingest_config = "exports/ingest.toml"
/// embeddings = "exports/objects.emb"
///
/// [network]
/// null_realizations = 100
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub inputs: Inputs,
    pub ingest: IngestOptions,
    pub stats: StatsOptions,
    pub network: NetworkOptions,
    pub visual: VisualOptions,
    pub predict: ExperimentSpec,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            out: PathBuf::from("out"),
            inputs: Inputs::default(),
            ingest: IngestOptions::default(),
            stats: StatsOptions::default(),
            network: NetworkOptions::default(),
            visual: VisualOptions::default(),
            predict: ExperimentSpec::default(),
            synth: SynthConfig::default(),
        }
    }
}

/// Input files. When `trades` is empty the files written by `synth` under
/// the output directory are used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub trades: Vec<PathBuf>,
    pub rates: Option<PathBuf>,
    pub ingest_config: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestOptions {
    /// Abort on the first malformed row instead of skipping it.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsOptions {
    pub window_days: u32,
    pub centered: bool,
    pub low_volume_usd: f64,
    pub resale_horizons: Vec<u32>,
    /// Use one cohort for every resale horizon.
    pub fixed_cohort: bool,
    /// Fixed lower cutoff for the sales-per-NFT tail fit; KS selection when unset.
    pub sales_xmin: Option<f64>,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            window_days: 30,
            centered: false,
            low_volume_usd: 1_000.0,
            resale_horizons: vec![1, 7, 30, 90, 182, 365],
            fixed_cohort: false,
            sales_xmin: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkOptions {
    pub null_realizations: usize,
    pub clique_within_event: bool,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        NetworkOptions { null_realizations: 100, clique_within_event: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisualOptions {
    /// Embedding length every input file must have.
    pub expected_dim: usize,
    pub pca_k: usize,
    pub max_pairs_per_cell: usize,
    /// Cap on objects per group before distances; 0 keeps all.
    pub max_per_group: usize,
}

impl Default for VisualOptions {
    fn default() -> Self {
        VisualOptions {
            expected_dim: nftmarket::visual::EMBEDDING_DIM,
            pca_k: 5,
            max_pairs_per_cell: 100_000,
            max_per_group: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        if !path.exists() {
            return Err(Failure::Validation(format!("config file not found: {}", path.display())));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Runtime(e.into()))?;
        toml::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.predict.validate().map_err(|e| Failure::Validation(e.to_string()))?;
        self.synth.validate().map_err(|e| Failure::Validation(e.to_string()))?;
        if self.stats.window_days == 0 {
            return Err(Failure::Validation("stats.window_days must be positive".into()));
        }
        if self.stats.sales_xmin.is_some_and(|x| x.is_nan() || x <= 0.5) {
            return Err(Failure::Validation("stats.sales_xmin must exceed 0.5".into()));
        }
        if self.visual.pca_k == 0 {
            return Err(Failure::Validation("visual.pca_k must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the configuration as TOML, with the output directory
    /// left out so that relocating a run does not change the hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let text = toml::to_string(&c).expect("run config is always serializable");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn dir(&self, sub: &str) -> PathBuf {
        self.out.join(sub)
    }

    pub fn synth_dir(&self) -> PathBuf {
        self.dir("synth")
    }

    pub fn trades(&self) -> Vec<PathBuf> {
        if self.inputs.trades.is_empty() {
            vec![self.synth_dir().join(nftmarket::synth::TRADES_FILE)]
        } else {
            self.inputs.trades.clone()
        }
    }

    fn synth_default(&self, explicit: &Option<PathBuf>, file: &str) -> Option<PathBuf> {
        match explicit {
            Some(p) => Some(p.clone()),
            None if self.inputs.trades.is_empty() => Some(self.synth_dir().join(file)),
            None => None,
        }
    }

    pub fn rates(&self) -> Option<PathBuf> {
        self.synth_default(&self.inputs.rates, nftmarket::synth::RATES_FILE)
    }

    pub fn ingest_config(&self) -> Option<PathBuf> {
        self.synth_default(&self.inputs.ingest_config, nftmarket::synth::INGEST_CONFIG_FILE)
    }

    /// Explicit embeddings must exist; the synthetic default is optional.
    pub fn embeddings(&self) -> Option<PathBuf> {
        match &self.inputs.embeddings {
            Some(p) => Some(p.clone()),
            None => self.synth_default(&None, nftmarket::synth::EMBEDDINGS_FILE).filter(|p| p.exists()),
        }
    }

    /// Every input file the current configuration points at.
    pub fn input_files(&self) -> Vec<PathBuf> {
        let mut v = self.trades();
        v.extend(self.rates());
        v.extend(self.ingest_config());
        v.extend(self.embeddings());
        v
    }
}

pub fn require_file(path: &Path, what: &str) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("{what} not found: {}", path.display())))
    }
}

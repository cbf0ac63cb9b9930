//! Experiment configuration, read from TOML.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::dataset::{EncodingPolicy, Property, DEFAULT_MAX_COMBINATIONS};
use crate::evalstat::KernelChoice;
use crate::linear::{PolynomialSpec, DEFAULT_LAMBDAS};
use crate::nn::{Algorithm, TrainerSpec, MAX_HIDDEN};
use crate::svr::SvrParams;
use crate::synth::GroundTruthSpec;
use crate::tree::{PrunePolicy, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_records: usize,
    #[serde(flatten)]
    pub truth: GroundTruthSpec,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_records: 207,
            truth: GroundTruthSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub encoding: EncodingPolicy,
    pub max_combinations: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            encoding: EncodingPolicy::default(),
            max_combinations: DEFAULT_MAX_COMBINATIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FoldConfig {
    pub k: usize,
    /// Folds hold whole source records, so augmented twins never straddle
    /// a train/validation boundary.
    pub grouped: bool,
}

impl Default for FoldConfig {
    fn default() -> Self {
        Self { k: 10, grouped: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearGrid {
    pub degrees: Vec<u8>,
    pub lambdas: Vec<f64>,
    pub interactions: bool,
}

impl Default for LinearGrid {
    fn default() -> Self {
        Self {
            degrees: vec![1, 2, 3],
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            interactions: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NnGrid {
    pub hidden: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    /// Shared trainer settings; `algorithm` is taken from `algorithms`.
    pub trainer: TrainerSpec,
    /// Training rows per fold are subsampled to at most this many.
    pub max_train_samples: Option<usize>,
}

impl Default for NnGrid {
    fn default() -> Self {
        Self {
            hidden: (1..=MAX_HIDDEN).collect(),
            algorithms: vec![Algorithm::Lm, Algorithm::LmL2],
            trainer: TrainerSpec::default(),
            max_train_samples: Some(2000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrGrid {
    pub kernels: Vec<KernelChoice>,
    pub c: Vec<f64>,
    /// Settings shared by all cells; `c` is taken from the list above.
    pub params: SvrParams,
    pub max_train_samples: Option<usize>,
}

impl Default for SvrGrid {
    fn default() -> Self {
        Self {
            kernels: vec![
                KernelChoice::Gaussian { gamma: None },
                KernelChoice::Polynomial { degree: 3, coef0: 1.0 },
                KernelChoice::Linear,
            ],
            c: vec![1.0],
            params: SvrParams::default(),
            max_train_samples: Some(2000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeGrid {
    pub params: TreeParams,
    pub gap_tol: Vec<f64>,
}

impl Default for TreeGrid {
    fn default() -> Self {
        Self {
            params: TreeParams::default(),
            gap_tol: vec![PrunePolicy::default().gap_tol],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Record-level dataset CSV.
    pub dataset: PathBuf,
    pub output_dir: PathBuf,
    pub properties: Vec<Property>,
    /// Base seed for folds, initial weights and subsampling.
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
    /// Significance level of the pairwise comparison.
    pub alpha: f64,
    pub synth: SynthConfig,
    pub augment: AugmentConfig,
    pub folds: FoldConfig,
    pub linear: LinearGrid,
    pub nn: NnGrid,
    pub svr: SvrGrid,
    pub tree: TreeGrid,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::from("data/synthetic.csv"),
            output_dir: PathBuf::from("out"),
            properties: Property::ALL.to_vec(),
            seed: 42,
            jobs: 1,
            alpha: 0.05,
            synth: SynthConfig::default(),
            augment: AugmentConfig::default(),
            folds: FoldConfig::default(),
            linear: LinearGrid::default(),
            nn: NnGrid::default(),
            svr: SvrGrid::default(),
            tree: TreeGrid::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: Self = toml::from_str(text).map_err(|e| PipelineError::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    /// Checks everything that can be checked without touching the disk.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Usage(format!("config: {m}")));
        if self.properties.is_empty() {
            return bad("`properties` is empty".into());
        }
        if self.folds.k < 2 {
            return bad(format!("folds.k must be at least 2, got {}", self.folds.k));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.synth.n_records == 0 {
            return bad("synth.n_records must be positive".into());
        }
        self.synth.truth.validate().map_err(|e| PipelineError::Usage(format!("config: synth: {e}")))?;
        let g = &self.linear;
        if g.degrees.is_empty() || g.lambdas.is_empty() {
            return bad("linear grid is empty".into());
        }
        for &d in &g.degrees {
            for &l in &g.lambdas {
                PolynomialSpec::new(d, g.interactions, l).map_err(|e| PipelineError::Usage(format!("config: linear: {e}")))?;
            }
        }
        let g = &self.nn;
        if g.hidden.is_empty() || g.algorithms.is_empty() {
            return bad("nn grid is empty".into());
        }
        if let Some(&h) = g.hidden.iter().find(|&&h| h == 0 || h > MAX_HIDDEN) {
            return bad(format!("nn.hidden entries must lie in 1..={MAX_HIDDEN}, got {h}"));
        }
        for &a in &g.algorithms {
            TrainerSpec { algorithm: a, ..g.trainer }
                .validate()
                .map_err(|e| PipelineError::Usage(format!("config: nn: {e}")))?;
        }
        let g = &self.svr;
        if g.kernels.is_empty() || g.c.is_empty() {
            return bad("svr grid is empty".into());
        }
        for &c in &g.c {
            SvrParams { c, ..g.params }
                .validate()
                .map_err(|e| PipelineError::Usage(format!("config: svr: {e}")))?;
        }
        if g.max_train_samples == Some(0) || self.nn.max_train_samples == Some(0) {
            return bad("max_train_samples must be positive".into());
        }
        if self.tree.gap_tol.is_empty() {
            return bad("tree.gap_tol is empty".into());
        }
        if self.tree.gap_tol.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return bad("tree.gap_tol entries must be finite and non-negative".into());
        }
        if self.tree.params.min_leaf == 0 {
            return bad("tree.params.min_leaf must be at least 1".into());
        }
        Ok(())
    }
}

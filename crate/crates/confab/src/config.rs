use std::path::{Path, PathBuf};

use confab_core::fitlab::DEFAULT_SWEEP_WEIGHTS;
use confab_core::refdata::ParamAxis;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};

/// Pipeline configuration. Loaded from JSON; every field has a default and
/// command-line flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    /// Content-addressed response cache.
    pub fixtures: PathBuf,
    pub offline: bool,
    pub partial_weight: f64,
    pub contradiction_penalty: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub param_axis: ParamAxis,
    /// Live-mode requests per second.
    pub rate_limit: f64,
    pub mailto: Option<String>,
    /// Minimum matched references for a model to enter the citation gradient.
    pub min_matched: usize,
    pub resamples: usize,
    pub match_threshold: f64,
    pub sweep_weights: Vec<f64>,
    /// Adds model-clustered standard errors to the sigmoid report.
    pub cluster_robust: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            fixtures: PathBuf::from("fixtures"),
            offline: true,
            partial_weight: confab_core::verify::DEFAULT_PARTIAL_WEIGHT,
            contradiction_penalty: confab_core::verify::DEFAULT_CONTRADICTION_PENALTY,
            seed: 20260308,
            out_dir: PathBuf::from("out"),
            param_axis: ParamAxis::Total,
            rate_limit: crate::openalex::DEFAULT_RATE_LIMIT,
            mailto: None,
            min_matched: confab_core::citetail::DEFAULT_MIN_N,
            resamples: confab_core::fitlab::DEFAULT_RESAMPLES,
            match_threshold: confab_core::works::DEFAULT_MATCH_THRESHOLD,
            sweep_weights: DEFAULT_SWEEP_WEIGHTS.to_vec(),
            cluster_robust: false,
        }
    }
}

/// Fields that determine output bytes apart from the relevance weight.
#[derive(Serialize)]
struct HashInput<'a> {
    dataset_sha256: &'a str,
    contradiction_penalty: f64,
    seed: u64,
    param_axis: ParamAxis,
    min_matched: usize,
    resamples: usize,
    match_threshold: f64,
    sweep_weights: &'a [f64],
    cluster_robust: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> AppResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| AppError::io(path, e))?;
        let cfg: RunConfig =
            serde_json::from_slice(&bytes).map_err(|e| AppError::Usage(format!("config {}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> AppResult<()> {
        let bad = |m: &str| Err(AppError::Usage(m.to_string()));
        if !(0.0..=1.0).contains(&self.partial_weight) {
            return bad("partial_weight must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.match_threshold) {
            return bad("match_threshold must lie in [0, 1]");
        }
        if !(self.contradiction_penalty <= 0.0) {
            return bad("contradiction_penalty must be <= 0");
        }
        if !(self.rate_limit > 0.0) {
            return bad("rate_limit must be > 0");
        }
        if self.resamples == 0 {
            return bad("resamples must be >= 1");
        }
        if self.sweep_weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return bad("sweep weights must lie in [0, 1]");
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of the output-determining fields.
    /// Paths, network settings and `partial_weight` are excluded.
    pub fn config_hash(&self, dataset_sha256: &str) -> String {
        let input = HashInput {
            dataset_sha256,
            contradiction_penalty: self.contradiction_penalty,
            seed: self.seed,
            param_axis: self.param_axis,
            min_matched: self.min_matched,
            resamples: self.resamples,
            match_threshold: self.match_threshold,
            sweep_weights: &self.sweep_weights,
            cluster_robust: self.cluster_robust,
        };
        let json = serde_json::to_vec(&input).expect("config hash input serializes");
        hex::encode(Sha256::digest(&json))
    }
}

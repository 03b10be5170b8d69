use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::refdata::{build_observations, model_quality, CellAccounting, ObservationCell, ScoredReference};
use crate::verify::DEFAULT_PARTIAL_WEIGHT;

use super::logistic::fit_sigmoid;
use super::ols::fit_ols;
use super::rank::spearman;

pub const DEFAULT_SWEEP_WEIGHTS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub weight: f64,
    pub sigmoid_r2: f64,
    pub loglinear_r2: f64,
    /// Rank correlation of model mean quality against the baseline weight.
    pub rank_rho: f64,
}

/// Predictor values per cell: log₁₀ parameters by model, log₁₀ works count by topic.
#[derive(Debug, Clone, Default)]
pub struct Covariates {
    pub log10_params: BTreeMap<String, f64>,
    pub log10_works: BTreeMap<String, f64>,
}

impl Covariates {
    /// `(log10_P, log10_S, quality)` triples for cells with both predictors known.
    pub fn triples(&self, cells: &[ObservationCell]) -> Vec<(f64, f64, f64)> {
        cells
            .iter()
            .filter_map(|c| {
                let p = self.log10_params.get(&c.model)?;
                let s = self.log10_works.get(&c.topic)?;
                Some((*p, *s, c.quality))
            })
            .collect()
    }
}

/// Sigmoid R², log-linear R² and per-model mean quality at one weight.
type SweepPoint = (f64, f64, Vec<(String, f64)>);

fn sweep_point(
    cells: &[CellAccounting],
    refs: &[ScoredReference],
    cov: &Covariates,
    weight: f64,
) -> Result<SweepPoint> {
    let obs = build_observations(cells, refs, weight)?;
    let kept: Vec<ObservationCell> = obs
        .cells
        .into_iter()
        .filter(|c| cov.log10_params.contains_key(&c.model) && cov.log10_works.contains_key(&c.topic))
        .collect();
    let t = cov.triples(&kept);
    let sig = fit_sigmoid(&t)?;
    let lp: Vec<f64> = t.iter().map(|c| c.0).collect();
    let ls: Vec<f64> = t.iter().map(|c| c.1).collect();
    let q: Vec<f64> = t.iter().map(|c| c.2).collect();
    let lin = fit_ols(&[&lp, &ls], &q)?;
    Ok((sig.r2, lin.r2, model_quality(&kept)))
}

/// Refits the sigmoid and the two-predictor log-linear model at each PARTIAL
/// weight and compares the model ranking with the 0.50 baseline.
pub fn partial_weight_sweep(
    cells: &[CellAccounting],
    refs: &[ScoredReference],
    cov: &Covariates,
    weights: &[f64],
) -> Result<Vec<SweepRow>> {
    let (_, _, base) = sweep_point(cells, refs, cov, DEFAULT_PARTIAL_WEIGHT)?;
    let base_q: Vec<f64> = base.iter().map(|m| m.1).collect();
    weights
        .iter()
        .map(|&w| {
            let (sigmoid_r2, loglinear_r2, mq) = sweep_point(cells, refs, cov, w)?;
            if mq.iter().map(|m| &m.0).ne(base.iter().map(|m| &m.0)) {
                return Err(Error::invalid("model set changed across sweep weights"));
            }
            let q: Vec<f64> = mq.iter().map(|m| m.1).collect();
            // a model ranking that collapses to a tie carries no order information
            let rank_rho = match spearman(&q, &base_q) {
                Ok(s) => s.rho,
                Err(Error::Undefined(_)) => f64::NAN,
                Err(e) => return Err(e),
            };
            Ok(SweepRow {
                weight: w,
                sigmoid_r2,
                loglinear_r2,
                rank_rho,
            })
        })
        .collect()
}

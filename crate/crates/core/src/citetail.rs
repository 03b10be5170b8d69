//! Citation-count gradient across model sizes.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::citeparse::Stopwords;
use crate::error::{Error, Result};
use crate::fitlab::bootstrap::{bootstrap_median_ci, BootstrapCI};
use crate::fitlab::ols::{weighted_loglog_fit, OlsFit};
use crate::fitlab::rank::{spearman, Spearman};
use crate::math::log10;
use crate::verify::Status;
use crate::works::{match_work, WorkSource};

pub const DEFAULT_MIN_N: usize = 50;
/// Candidates requested per title search.
pub const SEARCH_DEPTH: usize = 5;
const Z_975: f64 = 1.96;

/// One analysed reference entering the citation analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationCandidate {
    pub model: String,
    pub reference_id: String,
    pub title: String,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CitationSample {
    pub model: String,
    pub matched: Vec<(String, u64)>,
    pub n_unmatched: usize,
    pub n_excluded_status: usize,
    /// References skipped because the search itself failed.
    pub n_errors: usize,
}

impl CitationSample {
    pub fn n_analysed(&self) -> usize {
        self.matched.len() + self.n_unmatched + self.n_excluded_status + self.n_errors
    }

    pub fn counts(&self) -> Vec<f64> {
        self.matched.iter().map(|m| m.1 as f64).collect()
    }
}

/// Matches verified references against `source` and groups citation counts
/// by model, in first-appearance order. Failed searches are counted, not fatal.
pub fn build_citation_samples<S: WorkSource>(
    refs: &[CitationCandidate],
    source: &S,
    threshold: f64,
    stopwords: &Stopwords,
) -> Vec<CitationSample> {
    let mut order: Vec<String> = Vec::new();
    let mut by_model: BTreeMap<String, CitationSample> = BTreeMap::new();
    for r in refs {
        let sample = by_model.entry(r.model.clone()).or_insert_with(|| {
            order.push(r.model.clone());
            CitationSample {
                model: r.model.clone(),
                ..Default::default()
            }
        });
        if !r.status.is_verified() {
            sample.n_excluded_status += 1;
            continue;
        }
        match source.search_candidates(&r.title, SEARCH_DEPTH) {
            Err(_) => sample.n_errors += 1,
            Ok(cands) => match match_work(&r.title, &cands, threshold, stopwords) {
                Some(w) => sample.matched.push((r.reference_id.clone(), w.cited_by_count)),
                None => sample.n_unmatched += 1,
            },
        }
    }
    order.into_iter().map(|m| by_model.remove(&m).unwrap()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCitations {
    pub model: String,
    pub params: f64,
    pub n_matched: usize,
    pub median: f64,
    pub ci: BootstrapCI,
    /// Normal-scale SE of log₁₀(median) from the percentile CI.
    pub se_log10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationGradient {
    pub models: Vec<ModelCitations>,
    /// Models dropped with the reason.
    pub excluded: Vec<(String, String)>,
    pub fit: OlsFit,
    pub spearman: Spearman,
}

impl CitationGradient {
    pub fn slope(&self) -> f64 {
        self.fit.slope()
    }
}

/// Per-model medians with bootstrap CIs, then an inverse-variance weighted
/// fit of log₁₀(median) on log₁₀(P) and Spearman over (P, median).
pub fn citation_gradient(
    samples: &[CitationSample],
    params: &BTreeMap<String, f64>,
    min_n: usize,
    resamples: usize,
    seed: u64,
) -> Result<CitationGradient> {
    let mut models = Vec::new();
    let mut excluded = Vec::new();
    for s in samples {
        let Some(&p) = params.get(&s.model).filter(|p| **p > 0.0) else {
            excluded.push((s.model.clone(), "unknown parameter count".to_string()));
            continue;
        };
        if s.matched.len() < min_n.max(2) {
            excluded.push((s.model.clone(), alloc::format!("{} matched < {min_n}", s.matched.len())));
            continue;
        }
        let ci = bootstrap_median_ci(&s.counts(), resamples, seed)?;
        if !(ci.lower > 0.0) {
            excluded.push((s.model.clone(), "median interval reaches zero citations".to_string()));
            continue;
        }
        let se_log10 = (log10(ci.upper) - log10(ci.lower)) / (2.0 * Z_975);
        if !(se_log10 > 0.0) {
            excluded.push((s.model.clone(), "zero-width median interval".to_string()));
            continue;
        }
        models.push(ModelCitations {
            model: s.model.clone(),
            params: p,
            n_matched: s.matched.len(),
            median: ci.point,
            ci,
            se_log10,
        });
    }
    if models.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: models.len(),
        });
    }
    let x: Vec<f64> = models.iter().map(|m| log10(m.params)).collect();
    let y: Vec<f64> = models.iter().map(|m| log10(m.median)).collect();
    let se: Vec<f64> = models.iter().map(|m| m.se_log10).collect();
    let fit = weighted_loglog_fit(&x, &y, &se)?;
    let med: Vec<f64> = models.iter().map(|m| m.median).collect();
    let spearman = spearman(&x, &med)?;
    Ok(CitationGradient {
        models,
        excluded,
        fit,
        spearman,
    })
}

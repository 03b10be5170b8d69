//! Stage orchestration. Each stage reads its upstream artifacts from the
//! output bundle and writes stamped files back into it.

mod analysis;
mod report;
mod stages;

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use confab_core::citeparse::Stopwords;
use confab_core::refdata::Dataset;

use crate::config::RunConfig;
use crate::dataset::load_dataset;
use crate::error::{AppError, AppResult};
use crate::openalex::{ClientConfig, FixtureCache, OpenAlexClient, Request};
use crate::output::Bundle;

pub use analysis::{per_model_fit, FamilySlope, PerModelFit, TheoryOptions, ZipfOptions};
pub use stages::{VerificationRecord, WorksCountRow};

/// Artifact names shared between stages.
pub mod files {
    pub const REFERENCES: &str = "references.jsonl";
    pub const PARSE_FAILURES: &str = "parse_failures.jsonl";
    pub const ACCOUNTING_JSON: &str = "accounting.json";
    pub const ACCOUNTING_CSV: &str = "accounting.csv";
    pub const VERIFICATION: &str = "verification.jsonl";
    pub const VERIFY_SUMMARY: &str = "verify_summary.json";
    pub const SCORED: &str = "scored.jsonl";
    pub const WORKS_COUNTS: &str = "works_counts.csv";
    pub const CELLS: &str = "cells.csv";
    pub const SCORE_JSON: &str = "score.json";
    pub const FIT_JSON: &str = "fit.json";
    pub const REGIMES: &str = "regimes.csv";
    pub const SPEARMAN: &str = "spearman_by_model.csv";
    pub const SWEEP: &str = "sweep.csv";
    pub const CURVE: &str = "sigmoid_curve.csv";
    pub const SCATTER: &str = "scatter.csv";
    pub const PER_MODEL_JSON: &str = "per_model_fit.json";
    pub const PER_MODEL_CSV: &str = "per_model_fit.csv";
    pub const THEORY_JSON: &str = "theory.json";
    pub const TABLE1: &str = "table1.csv";
    pub const SIMULATOR: &str = "simulator.csv";
    pub const ZIPF_JSON: &str = "zipf.json";
    pub const ZIPF_ROLLING: &str = "zipf_rolling.csv";
    pub const CITETAIL_CSV: &str = "citetail.csv";
    pub const CITETAIL_JSON: &str = "citetail.json";
    pub const QUALITY_MATRIX: &str = "quality_matrix.csv";
    pub const TABLE_A4: &str = "table_a4.csv";
    pub const SUMMARY: &str = "summary.txt";
}

pub struct Pipeline {
    cfg: RunConfig,
    dataset: Option<Dataset>,
    bundle: Bundle,
    stopwords: Stopwords,
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> AppResult<Self> {
        cfg.validate()?;
        let (dataset, hash) = match &cfg.dataset {
            Some(p) => {
                let (d, h) = load_dataset(p)?;
                (Some(d), h)
            }
            None => (None, "none".to_string()),
        };
        let bundle = Bundle::new(&cfg.out_dir, cfg.seed, cfg.config_hash(&hash), cfg.partial_weight);
        Ok(Pipeline {
            cfg,
            dataset,
            bundle,
            stopwords: Stopwords::english(),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    fn dataset(&self) -> AppResult<&Dataset> {
        self.dataset
            .as_ref()
            .ok_or_else(|| AppError::Usage("this stage needs a dataset (--dataset or config)".into()))
    }

    fn client(&self) -> OpenAlexClient {
        let cc = ClientConfig {
            offline: self.cfg.offline,
            rate_limit: self.cfg.rate_limit,
            mailto: self.cfg.mailto.clone(),
            ..ClientConfig::default()
        };
        let cc = if self.cfg.offline { cc } else { cc.with_env_mailto() };
        OpenAlexClient::new(FixtureCache::new(&self.cfg.fixtures), cc)
    }

    /// In offline mode, fails listing every request without a recorded response.
    fn require_fixtures(&self, client: &OpenAlexClient, reqs: impl IntoIterator<Item = Request>) -> AppResult<()> {
        if !self.cfg.offline {
            return Ok(());
        }
        let mut seen = BTreeSet::new();
        let mut missing = Vec::new();
        for r in reqs {
            let fp = r.fingerprint();
            if seen.insert(fp.clone()) && !client.cache().contains(&r) {
                missing.push(format!("{fp}  {}", r.describe()));
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(AppError::MissingFixtures(missing))
        }
    }

    /// Every stage that applies to the configured inputs, in order.
    pub fn run_all(&self) -> AppResult<()> {
        self.verify()?;
        self.score()?;
        self.fit(None)?;
        self.theory(&TheoryOptions::default())?;
        self.citetail()?;
        self.report()?;
        Ok(())
    }
}

/// Order-preserving parallel map over scoped worker threads.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(16)
        .min(items.len());
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let parts: Vec<Vec<(usize, R)>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= items.len() {
                            break local;
                        }
                        local.push((i, f(&items[i])));
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    for (i, r) in parts.into_iter().flatten() {
        slots[i] = Some(r);
    }
    slots.into_iter().map(|r| r.expect("every index mapped")).collect()
}

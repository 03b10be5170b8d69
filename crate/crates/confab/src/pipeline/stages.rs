use std::collections::BTreeMap;

use confab_core::citetail::{build_citation_samples, citation_gradient, CitationCandidate, SEARCH_DEPTH};
use confab_core::refdata::{build_observations, CellAccounting, ReferenceKey, ScoredReference};
use confab_core::verify::{match_and_verify, FieldVerdicts, Status};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{files, par_map, Pipeline};
use crate::dataset::{ingest, CellCounts, Ingested, Totals};
use crate::error::AppResult;
use crate::openalex::{OpenAlexClient, OpenAlexError};
use crate::output::{fmt_f64, read_json, read_jsonl, Dependence::*};

/// One line of the verification results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub reference_id: String,
    pub key: ReferenceKey,
    pub title: String,
    pub verdicts: FieldVerdicts,
    pub authenticity: f64,
    pub status: Status,
    pub matched_candidate: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct AccountingReport {
    pub totals: Totals,
    pub cells: Vec<CellCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorksCountRow {
    pub topic: String,
    pub works_count: u64,
    /// `dataset` or `openalex`.
    pub source: String,
}

fn flag_str(c: &CellCounts) -> String {
    c.flag
        .map(|f| {
            serde_json::to_value(f)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default()
        })
        .unwrap_or_default()
}

impl Pipeline {
    /// Split, parse and deduplicate; writes references, parse failures and accounting.
    pub fn ingest(&self) -> AppResult<Ingested> {
        let ing = ingest(self.dataset()?);
        let b = &self.bundle;
        b.write_jsonl(files::REFERENCES, Independent, &ing.references)?;
        b.write_jsonl(files::PARSE_FAILURES, Independent, &ing.failures)?;
        let totals = Totals::of(&ing.cells);
        b.write_json(
            files::ACCOUNTING_JSON,
            Independent,
            &AccountingReport {
                totals,
                cells: ing.cells.clone(),
            },
        )?;
        let mut rows: Vec<Vec<String>> = ing
            .cells
            .iter()
            .map(|c| {
                vec![
                    c.model.clone(),
                    c.topic.clone(),
                    c.requested.to_string(),
                    c.produced.to_string(),
                    c.parse_failures.to_string(),
                    c.duplicates.to_string(),
                    c.analysed.to_string(),
                    flag_str(c),
                ]
            })
            .collect();
        rows.push(vec![
            "TOTAL".into(),
            String::new(),
            totals.requested.to_string(),
            totals.produced.to_string(),
            totals.parse_failures.to_string(),
            totals.duplicates.to_string(),
            totals.analysed.to_string(),
            String::new(),
        ]);
        b.write_csv(
            files::ACCOUNTING_CSV,
            Independent,
            &[
                "model",
                "topic",
                "requested",
                "produced",
                "parse_failures",
                "duplicates",
                "analysed",
                "flag",
            ],
            &rows,
        )?;
        Ok(ing)
    }

    /// Ingest, then match every analysed reference and classify its fields.
    pub fn verify(&self) -> AppResult<(Totals, Vec<VerificationRecord>)> {
        let ing = self.ingest()?;
        let client = self.client();
        self.require_fixtures(
            &client,
            ing.references
                .iter()
                .map(|r| OpenAlexClient::works_search_request(&r.parsed.title, SEARCH_DEPTH)),
        )?;
        let results = par_map(&ing.references, |r| -> Result<VerificationRecord, OpenAlexError> {
            let cands = client.search_candidates(&r.parsed.title, SEARCH_DEPTH)?;
            let id = r.key.id();
            let v = match_and_verify(
                &id,
                &r.parsed,
                &cands,
                self.cfg.match_threshold,
                &self.stopwords,
                self.cfg.contradiction_penalty,
            );
            Ok(VerificationRecord {
                reference_id: id,
                key: r.key.clone(),
                title: r.parsed.title.clone(),
                verdicts: v.verdicts,
                authenticity: v.authenticity,
                status: v.status,
                matched_candidate: v.matched_candidate,
            })
        });
        let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        self.bundle.write_jsonl(files::VERIFICATION, Independent, &records)?;

        let mut by_status: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &records {
            *by_status.entry(r.status.as_str()).or_default() += 1;
        }
        let totals = Totals::of(&ing.cells);
        let mean_auth = if records.is_empty() {
            f64::NAN
        } else {
            records.iter().map(|r| r.authenticity).sum::<f64>() / records.len() as f64
        };
        self.bundle.write_json(
            files::VERIFY_SUMMARY,
            Independent,
            &json!({
                "accounting": totals,
                "status_counts": by_status,
                "mean_authenticity": (!mean_auth.is_nan()).then_some(mean_auth),
                "match_threshold": self.cfg.match_threshold,
                "contradiction_penalty": self.cfg.contradiction_penalty,
                "search_depth": SEARCH_DEPTH,
            }),
        )?;
        Ok((totals, records))
    }

    fn works_counts(&self) -> AppResult<Vec<WorksCountRow>> {
        let ds = self.dataset()?;
        let client = self.client();
        self.require_fixtures(
            &client,
            ds.topics
                .iter()
                .filter(|t| t.works_count.is_none())
                .map(|t| OpenAlexClient::works_count_request(&t.name)),
        )?;
        ds.topics
            .iter()
            .map(|t| {
                Ok(match t.works_count {
                    Some(n) => WorksCountRow {
                        topic: t.name.clone(),
                        works_count: n,
                        source: "dataset".into(),
                    },
                    None => WorksCountRow {
                        topic: t.name.clone(),
                        works_count: client.topic_works_count(&t.name)?,
                        source: "openalex".into(),
                    },
                })
            })
            .collect()
    }

    /// Per-reference quality and model×topic observation cells.
    pub fn score(&self) -> AppResult<Vec<confab_core::refdata::ObservationCell>> {
        let ds = self.dataset()?;
        self.bundle.require(&[files::VERIFICATION, files::ACCOUNTING_JSON])?;
        let records: Vec<VerificationRecord> = read_jsonl(&self.bundle.path(files::VERIFICATION))?;
        let acct: AccountingReport = read_json(&self.bundle.path(files::ACCOUNTING_JSON))?;
        let works = self.works_counts()?;

        let rel = ds.relevance_map();
        let scored: Vec<ScoredReference> = records
            .iter()
            .map(|r| ScoredReference {
                key: r.key.clone(),
                authenticity: r.authenticity,
                relevance: rel.get(&r.key).copied(),
            })
            .collect();
        let cells: Vec<CellAccounting> = acct.cells.iter().map(cell_accounting).collect();
        let obs = build_observations(&cells, &scored, self.cfg.partial_weight)?;

        let b = &self.bundle;
        b.write_jsonl(files::SCORED, Independent, &scored)?;
        let wrows: Vec<Vec<String>> = works
            .iter()
            .map(|w| {
                let t = ds.topic(&w.topic).expect("topic from dataset");
                vec![
                    w.topic.clone(),
                    t.group.clone(),
                    t.specificity_level.to_string(),
                    w.works_count.to_string(),
                    w.source.clone(),
                    OpenAlexClient::works_count_request(&w.topic).params["filter"].clone(),
                ]
            })
            .collect();
        b.write_csv(
            files::WORKS_COUNTS,
            Independent,
            &[
                "topic",
                "group",
                "specificity_level",
                "works_count",
                "source",
                "query_filter",
            ],
            &wrows,
        )?;

        let log10_works: BTreeMap<&str, f64> = works
            .iter()
            .filter(|w| w.works_count > 0)
            .map(|w| (w.topic.as_str(), (w.works_count as f64).log10()))
            .collect();
        let rows: Vec<Vec<String>> = obs
            .cells
            .iter()
            .map(|c| {
                let m = ds.model(&c.model).expect("model from dataset");
                let lp = m.fit_params(self.cfg.param_axis).map(f64::log10);
                vec![
                    c.model.clone(),
                    c.topic.clone(),
                    m.family.clone(),
                    serde_json::to_value(m.architecture)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_string))
                        .unwrap_or_default(),
                    lp.map_or(String::new(), fmt_f64),
                    log10_works.get(c.topic.as_str()).map_or(String::new(), |v| fmt_f64(*v)),
                    c.n_requested.to_string(),
                    c.n_produced.to_string(),
                    c.n_analysed.to_string(),
                    fmt_f64(c.authenticity_mean),
                    fmt_f64(c.relevance_mean),
                    fmt_f64(c.quality),
                ]
            })
            .collect();
        b.write_csv(files::CELLS, Relevance, &super::analysis::CELL_COLUMNS, &rows)?;
        b.write_json(
            files::SCORE_JSON,
            Relevance,
            &json!({
                "n_cells": obs.cells.len(),
                "n_references": scored.len(),
                "omitted_cells": obs.omitted.iter().map(|(m, t)| json!({"model": m, "topic": t})).collect::<Vec<_>>(),
                "param_axis": self.cfg.param_axis,
            }),
        )?;
        Ok(obs.cells)
    }

    /// Citation counts of verified references and the gradient across model sizes.
    pub fn citetail(&self) -> AppResult<confab_core::citetail::CitationGradient> {
        let ds = self.dataset()?;
        self.bundle.require(&[files::VERIFICATION])?;
        let records: Vec<VerificationRecord> = read_jsonl(&self.bundle.path(files::VERIFICATION))?;
        let cands: Vec<CitationCandidate> = records
            .iter()
            .map(|r| CitationCandidate {
                model: r.key.model.clone(),
                reference_id: r.reference_id.clone(),
                title: r.title.clone(),
                status: r.status,
            })
            .collect();
        let client = self.client();
        self.require_fixtures(
            &client,
            cands
                .iter()
                .filter(|c| c.status.is_verified())
                .map(|c| OpenAlexClient::works_search_request(&c.title, SEARCH_DEPTH)),
        )?;
        let samples = build_citation_samples(&cands, &client, self.cfg.match_threshold, &self.stopwords);
        let params: BTreeMap<String, f64> = ds
            .models
            .iter()
            .filter_map(|m| m.fit_params(self.cfg.param_axis).map(|p| (m.name.clone(), p)))
            .collect();
        let g = citation_gradient(
            &samples,
            &params,
            self.cfg.min_matched,
            self.cfg.resamples,
            self.cfg.seed,
        )?;

        let rows: Vec<Vec<String>> = g
            .models
            .iter()
            .map(|m| {
                vec![
                    m.model.clone(),
                    fmt_f64(m.params),
                    m.n_matched.to_string(),
                    fmt_f64(m.median),
                    fmt_f64(m.ci.lower),
                    fmt_f64(m.ci.upper),
                ]
            })
            .collect();
        let b = &self.bundle;
        b.write_csv(
            files::CITETAIL_CSV,
            Independent,
            &["model", "params", "n_matched", "median", "ci_low", "ci_high"],
            &rows,
        )?;
        let per_model: Vec<_> = samples
            .iter()
            .map(|s| {
                json!({
                    "model": s.model,
                    "n_matched": s.matched.len(),
                    "n_unmatched": s.n_unmatched,
                    "n_excluded_status": s.n_excluded_status,
                    "n_errors": s.n_errors,
                })
            })
            .collect();
        b.write_json(
            files::CITETAIL_JSON,
            Independent,
            &json!({
                "slope": g.slope(),
                "gradient": g,
                "matching": per_model,
                "min_matched": self.cfg.min_matched,
                "resamples": self.cfg.resamples,
                "seed": self.cfg.seed,
                "param_axis": self.cfg.param_axis,
            }),
        )?;
        Ok(g)
    }
}

pub(crate) fn cell_accounting(c: &CellCounts) -> CellAccounting {
    CellAccounting {
        model: c.model.clone(),
        topic: c.topic.clone(),
        n_requested: c.requested,
        n_produced: c.produced,
        flag: c.flag,
    }
}

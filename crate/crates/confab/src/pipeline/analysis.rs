use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use confab_core::fitlab::{
    cluster_robust_se, fit_ols, fit_sigmoid_size_only, fit_sigmoid_with, incremental_f, partial_weight_sweep, spearman,
    Covariates, LmSettings, OlsFit,
};
use confab_core::refdata::{CellAccounting, ScoredReference};
use confab_core::theory::{
    classify_regime, content_sensitivity, efficiency, interference_floor, linearize, reference_slope, required_content,
    required_params_log10, simulate_sweep, simulator_slopes, QualityLink, TheoryExponents,
};
use confab_core::zipf::{
    bootstrap_alpha_ci, bootstrap_mle_ci, fit_zipf_mle, fit_zipf_ols, mle_standard_error, rolling_window_alpha,
    RankedFrequencies,
};
use serde::Serialize;
use serde_json::json;

use super::stages::{cell_accounting, AccountingReport};
use super::{files, Pipeline};
use crate::error::{AppError, AppResult};
use crate::output::{column, fmt_f64, read_csv, read_json, read_jsonl, Dependence::*};
use crate::published;

pub(crate) const CELL_COLUMNS: [&str; 12] = [
    "model",
    "topic",
    "family",
    "architecture",
    "log10_params",
    "log10_works",
    "n_requested",
    "n_produced",
    "n_analysed",
    "authenticity_mean",
    "relevance_mean",
    "quality",
];

#[derive(Debug, Clone)]
struct CellRow {
    model: String,
    topic: String,
    architecture: String,
    log10_params: Option<f64>,
    log10_works: Option<f64>,
    quality: f64,
}

fn opt_f64(s: &str, path: &Path) -> AppResult<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| AppError::data(format!("{}: `{s}` is not a number", path.display())))
}

fn read_cells(path: &Path) -> AppResult<Vec<CellRow>> {
    let (h, rows) = read_csv(path)?;
    let [model, topic, lp, ls, q] =
        ["model", "topic", "log10_params", "log10_works", "quality"].map(|c| column(&h, c, path));
    let (model, topic, lp, ls, q) = (model?, topic?, lp?, ls?, q?);
    let arch = h.iter().position(|c| c == "architecture");
    rows.iter()
        .map(|r| {
            Ok(CellRow {
                model: r[model].clone(),
                topic: r[topic].clone(),
                architecture: arch.map_or("dense".to_string(), |i| r[i].clone()),
                log10_params: opt_f64(&r[lp], path)?,
                log10_works: opt_f64(&r[ls], path)?,
                quality: opt_f64(&r[q], path)?
                    .ok_or_else(|| AppError::data(format!("{}: empty quality", path.display())))?,
            })
        })
        .collect()
}

/// Cross-family and within-family log-linear fits on per-model quality.
#[derive(Debug, Clone, Serialize)]
pub struct PerModelFit {
    pub cross_family: OlsFit,
    pub models: Vec<String>,
    pub families: Vec<FamilySlope>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilySlope {
    pub family: String,
    pub n: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// OLS of quality on log₁₀(params, billions) across all `rows`, then within
/// each family that spans at least two sizes.
pub fn per_model_fit(rows: &[published::ModelRow]) -> AppResult<PerModelFit> {
    let rows: Vec<&published::ModelRow> = rows.iter().filter(|r| r.params.is_some()).collect();
    let lp: Vec<f64> = rows.iter().map(|r| r.params.unwrap().log10()).collect();
    let q: Vec<f64> = rows.iter().map(|r| r.quality).collect();
    let cross_family = fit_ols(&[&lp], &q)?;
    let mut by_family: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (r, (x, y)) in rows.iter().zip(lp.iter().zip(&q)) {
        let e = by_family.entry(r.family.as_str()).or_default();
        e.0.push(*x);
        e.1.push(*y);
    }
    let mut families = Vec::new();
    for (fam, (x, y)) in by_family {
        let distinct: BTreeSet<u64> = x.iter().map(|v| v.to_bits()).collect();
        if fam.is_empty() || distinct.len() < 2 {
            continue;
        }
        let f = fit_ols(&[&x], &y)?;
        families.push(FamilySlope {
            family: fam.to_string(),
            n: x.len(),
            slope: f.slope(),
            intercept: f.intercept(),
            r2: f.r2,
        });
    }
    Ok(PerModelFit {
        cross_family,
        models: rows.iter().map(|r| r.model.clone()).collect(),
        families,
    })
}

/// Options of the theory stage.
#[derive(Debug, Clone)]
pub struct TheoryOptions {
    /// Use the sigmoid from `fit.json` instead of the published parameters.
    pub from_fit: bool,
    /// Observed per-decade slope for the efficiency table; defaults to the
    /// published Llama within-family slope rounded to 3 decimals.
    pub observed_slope: Option<f64>,
    pub inventory: u64,
    pub c0: f64,
    pub link: QualityLink,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        TheoryOptions {
            from_fit: false,
            observed_slope: None,
            inventory: 10_000,
            c0: 1e-3,
            link: QualityLink { a: 4.0, b: 4.0 },
        }
    }
}

/// Options of the zipf stage.
#[derive(Debug, Clone)]
pub struct ZipfOptions {
    pub input: PathBuf,
    pub window: usize,
    /// Defaults to the smallest count.
    pub x_min: Option<f64>,
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

impl Pipeline {
    /// Sigmoid and OLS fits on the observation cells, with plot data and the sweep.
    pub fn fit(&self, cells_path: Option<&Path>) -> AppResult<()> {
        let path = cells_path.map_or_else(|| self.bundle.path(files::CELLS), Path::to_path_buf);
        if !path.is_file() {
            return Err(AppError::MissingArtifacts(vec![path]));
        }
        let all = read_cells(&path)?;
        let pop: Vec<&CellRow> = all
            .iter()
            .filter(|c| c.architecture == "dense" && c.log10_params.is_some())
            .collect();
        let no_s: BTreeSet<&str> = pop
            .iter()
            .filter(|c| c.log10_works.is_none())
            .map(|c| c.topic.as_str())
            .collect();
        if !no_s.is_empty() {
            return Err(AppError::data(format!(
                "cells missing works count for topics: {}",
                no_s.into_iter().collect::<Vec<_>>().join(", ")
            )));
        }
        let lp: Vec<f64> = pop.iter().map(|c| c.log10_params.unwrap()).collect();
        let ls: Vec<f64> = pop.iter().map(|c| c.log10_works.unwrap()).collect();
        let q: Vec<f64> = pop.iter().map(|c| c.quality).collect();
        let triples: Vec<(f64, f64, f64)> = (0..pop.len()).map(|i| (lp[i], ls[i], q[i])).collect();

        let settings = LmSettings::default();
        let (sig, sig_lm) = fit_sigmoid_with(&triples, &settings)?;
        let sig_size = fit_sigmoid_size_only(&triples)?;
        let ols1 = fit_ols(&[&lp], &q)?;
        let ols2 = fit_ols(&[&lp, &ls], &q)?;
        let f_sig = incremental_f(&sig_lm, &sig_size)?;
        let f_ols = incremental_f(&ols2, &ols1)?;
        let cluster_se = if self.cfg.cluster_robust {
            let ids: BTreeMap<&str, usize> = pop
                .iter()
                .map(|c| c.model.as_str())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .enumerate()
                .map(|(i, m)| (m, i))
                .collect();
            let clusters: Vec<usize> = pop.iter().map(|c| ids[c.model.as_str()]).collect();
            Some(cluster_robust_se(&sig_lm, &[&lp, &ls], &q, &clusters)?)
        } else {
            None
        };
        let lin = linearize(&sig);
        let extrap = required_params_log10(0.9, 32.0, &sig).ok();

        let b = &self.bundle;
        b.write_json(
            files::FIT_JSON,
            Relevance,
            &json!({
                "n_cells": pop.len(),
                "n_excluded_cells": all.len() - pop.len(),
                "population": "dense models with known parameter count",
                "sigmoid": sig,
                "sigmoid_cluster_robust_se": cluster_se,
                "sigmoid_size_only": { "coefficients": sig_size.coefficients, "r2": sig_size.r2, "rss": sig_size.rss },
                "lm_settings": settings,
                "ols_size_only": ols1,
                "ols_two_predictor": ols2,
                "decomposition": {
                    "primary": "sigmoid",
                    "sigmoid": {
                        "r2_size": sig_size.r2,
                        "r2_full": sig.r2,
                        "r2_increment": sig.r2 - sig_size.r2,
                        "f_test": f_sig,
                    },
                    "ols": {
                        "r2_size": ols1.r2,
                        "r2_full": ols2.r2,
                        "r2_increment": ols2.r2 - ols1.r2,
                        "f_test": f_ols,
                    },
                },
                "linearized": lin,
                "extrapolation": {
                    "quality_target": 0.9,
                    "works_count": 32,
                    "log10_params_billions": extrap,
                    "params": extrap.map(|l| 10f64.powf(l + 9.0)),
                },
            }),
        )?;

        let mut reg = Vec::new();
        let mut scatter = Vec::new();
        for c in &pop {
            let (p, s) = (c.log10_params.unwrap(), c.log10_works.unwrap());
            let z = sig.z(p, s);
            let pred = sig.predict(p, s);
            reg.push(vec![
                c.model.clone(),
                c.topic.clone(),
                fmt_f64(z),
                classify_regime(z).as_str().to_string(),
                fmt_f64(pred),
                fmt_f64(content_sensitivity(pred, sig.beta)?),
            ]);
            scatter.push(vec![
                c.model.clone(),
                c.topic.clone(),
                fmt_f64(p),
                fmt_f64(s),
                fmt_f64(c.quality),
                fmt_f64(pred),
                fmt_f64(c.quality - pred),
            ]);
        }
        b.write_csv(
            files::REGIMES,
            Relevance,
            &["model", "topic", "z", "regime", "predicted", "content_sensitivity"],
            &reg,
        )?;
        b.write_csv(
            files::SCATTER,
            Relevance,
            &[
                "model",
                "topic",
                "log10_params",
                "log10_works",
                "quality",
                "predicted",
                "residual",
            ],
            &scatter,
        )?;

        let s_levels: BTreeSet<u64> = ls.iter().map(|v| v.to_bits()).collect();
        let (lo, hi) = lp
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));
        let steps = ((hi - lo) / 0.05).round() as usize;
        let mut curve = Vec::new();
        for s in s_levels.iter().map(|b| f64::from_bits(*b)) {
            for i in 0..=steps {
                let p = lo + i as f64 * 0.05;
                curve.push(vec![fmt_f64(s), fmt_f64(p), fmt_f64(sig.predict(p, s))]);
            }
        }
        b.write_csv(
            files::CURVE,
            Relevance,
            &["log10_works", "log10_params", "predicted"],
            &curve,
        )?;

        let mut per_model: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for c in &pop {
            let e = per_model.entry(&c.model).or_default();
            e.0.push(c.log10_works.unwrap());
            e.1.push(c.quality);
        }
        let sp_rows: Vec<Vec<String>> = per_model
            .iter()
            .map(|(m, (x, y))| {
                let (rho, p) = spearman(x, y).map_or((f64::NAN, f64::NAN), |s| (s.rho, s.p_value));
                vec![m.to_string(), x.len().to_string(), fmt_f64(rho), fmt_f64(p)]
            })
            .collect();
        b.write_csv(files::SPEARMAN, Relevance, &["model", "n", "rho", "p_value"], &sp_rows)?;

        if cells_path.is_none() && self.bundle.require(&[files::SCORED, files::ACCOUNTING_JSON]).is_ok() {
            self.sweep(&pop)?;
        }
        Ok(())
    }

    fn sweep(&self, pop: &[&CellRow]) -> AppResult<()> {
        let refs: Vec<ScoredReference> = read_jsonl(&self.bundle.path(files::SCORED))?;
        let acct: AccountingReport = read_json(&self.bundle.path(files::ACCOUNTING_JSON))?;
        let cov = Covariates {
            log10_params: pop.iter().map(|c| (c.model.clone(), c.log10_params.unwrap())).collect(),
            log10_works: pop.iter().map(|c| (c.topic.clone(), c.log10_works.unwrap())).collect(),
        };
        let cells: Vec<CellAccounting> = acct
            .cells
            .iter()
            .filter(|c| cov.log10_params.contains_key(&c.model))
            .map(cell_accounting)
            .collect();
        let refs: Vec<ScoredReference> = refs
            .into_iter()
            .filter(|r| cov.log10_params.contains_key(&r.key.model))
            .collect();
        let rows = partial_weight_sweep(&cells, &refs, &cov, &self.cfg.sweep_weights)?;
        let out: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    fmt_f64(r.weight),
                    fmt_f64(r.sigmoid_r2),
                    fmt_f64(r.loglinear_r2),
                    fmt_f64(r.rank_rho),
                ]
            })
            .collect();
        self.bundle.write_csv(
            files::SWEEP,
            Independent,
            &["weight", "sigmoid_r2", "loglinear_r2", "rank_rho"],
            &out,
        )?;
        Ok(())
    }

    /// Per-model quality fits over the published model table, or a file of the same shape.
    pub fn fit_per_model(&self, input: Option<&Path>) -> AppResult<PerModelFit> {
        let rows = match input {
            None => published::dense_models(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| AppError::io(p, e))?;
                let rows: Vec<published::ModelRow> = csv::ReaderBuilder::new()
                    .comment(Some(b'#'))
                    .from_reader(text.as_bytes())
                    .deserialize()
                    .collect::<Result<_, _>>()
                    .map_err(|e| AppError::data(format!("{}: {e}", p.display())))?;
                rows.into_iter().filter(|m| m.spec().is_primary_dense()).collect()
            }
        };
        let fit = per_model_fit(&rows)?;
        let b = &self.bundle;
        b.write_json(files::PER_MODEL_JSON, Independent, &fit)?;
        let mut out = vec![vec![
            "cross-family".to_string(),
            fit.models.len().to_string(),
            fmt_f64(fit.cross_family.slope()),
            fmt_f64(fit.cross_family.intercept()),
            fmt_f64(fit.cross_family.r2),
        ]];
        out.extend(fit.families.iter().map(|f| {
            vec![
                f.family.clone(),
                f.n.to_string(),
                fmt_f64(f.slope),
                fmt_f64(f.intercept),
                fmt_f64(f.r2),
            ]
        }));
        b.write_csv(
            files::PER_MODEL_CSV,
            Independent,
            &["group", "n", "slope", "intercept", "r2"],
            &out,
        )?;
        Ok(fit)
    }

    /// Reference slopes, extrapolation, interference floor and simulator sweeps.
    pub fn theory(&self, opts: &TheoryOptions) -> AppResult<()> {
        let (sig, source, dep) = if opts.from_fit {
            self.bundle.require(&[files::FIT_JSON])?;
            let v: serde_json::Value = read_json(&self.bundle.path(files::FIT_JSON))?;
            let s = serde_json::from_value(v["sigmoid"].clone())
                .map_err(|e| AppError::data(format!("fit.json sigmoid: {e}")))?;
            (s, "fit", Relevance)
        } else {
            (published::sigmoid_fit(), "published", Independent)
        };
        let observed = match opts.observed_slope {
            Some(m) => m,
            None => {
                let fit = per_model_fit(&published::dense_models())?;
                let llama = fit
                    .families
                    .iter()
                    .find(|f| f.family == "Llama")
                    .expect("Llama family present");
                round3(llama.slope)
            }
        };
        let mut table1 = Vec::new();
        let mut t1_json = Vec::new();
        for az in [1.0, 1.23, 1.24] {
            let m_max = reference_slope(az)?;
            let eff = efficiency(observed, round3(m_max));
            table1.push(vec![fmt_f64(az), fmt_f64(m_max), format!("{:.3}", m_max), fmt_f64(eff)]);
            t1_json.push(json!({"alpha_z": az, "m_max": m_max, "efficiency": eff}));
        }
        let b = &self.bundle;
        b.write_csv(
            files::TABLE1,
            dep,
            &["alpha_z", "m_max", "m_max_3dp", "efficiency"],
            &table1,
        )?;

        let ns = [100usize, 1000, 10_000];
        let floors: Vec<f64> = ns
            .iter()
            .map(|&n| interference_floor(n, 30, 4, self.cfg.seed))
            .collect::<Result<_, _>>()?;
        let lx: Vec<f64> = ns.iter().map(|n| (*n as f64).log10()).collect();
        let ly: Vec<f64> = floors.iter().map(|f| f.log10()).collect();
        let floor_slope = fit_ols(&[&lx], &ly)?.slope();

        let exps = TheoryExponents {
            c0: opts.c0,
            ..Default::default()
        };
        let (sp, ss) = simulator_slopes(&exps, 1_000_000, 100.0)?;
        let mut sim = Vec::new();
        let topics = published::topics();
        let mut seen = BTreeSet::new();
        for t in &topics {
            if !seen.insert(t.works_count) {
                continue;
            }
            for pt in simulate_sweep(opts.inventory, t.works_count as f64, (0.0, 3.0), 31, &exps, &opts.link)? {
                sim.push(vec![
                    fmt_f64(pt.log10_p),
                    fmt_f64(pt.log10_s),
                    fmt_f64(pt.q),
                    fmt_f64(pt.quality),
                ]);
            }
        }
        b.write_csv(
            files::SIMULATOR,
            Independent,
            &["log10_P", "log10_S", "Q", "quality"],
            &sim,
        )?;

        let req = required_params_log10(0.9, 32.0, &sig).ok();
        let content: Vec<_> = [8.0, 70.0, 405.0]
            .iter()
            .map(|&p| json!({"params_billions": p, "log10_works_at_half": required_content(p, &sig).ok()}))
            .collect();
        b.write_json(
            files::THEORY_JSON,
            dep,
            &json!({
                "sigmoid_source": source,
                "sigmoid": { "alpha": sig.alpha, "beta": sig.beta, "gamma": sig.gamma },
                "linearized": linearize(&sig),
                "observed_slope": observed,
                "reference_slopes": t1_json,
                "extrapolation": {
                    "quality_target": 0.9,
                    "works_count": 32,
                    "log10_params_billions": req,
                    "params": req.map(|l| 10f64.powf(l + 9.0)),
                },
                "required_content": content,
                "interference_floor": {
                    "dimensions": ns,
                    "vectors": 30,
                    "trials": 4,
                    "mean_abs_overlap": floors,
                    "log_slope": floor_slope,
                },
                "simulator": {
                    "exponents": exps,
                    "inventory": opts.inventory,
                    "link": opts.link,
                    "params_slope": { "measured": sp, "predicted": exps.params_exponent() },
                    "content_slope": { "measured": ss, "predicted": exps.content_exponent() },
                },
            }),
        )?;
        Ok(())
    }

    /// Zipf exponent of a (concept, count) file: OLS, MLE, bootstrap CIs and the rolling profile.
    pub fn zipf(&self, opts: &ZipfOptions) -> AppResult<()> {
        let (h, rows) = read_csv(&opts.input)?;
        let ci = column(&h, "count", &opts.input)?;
        let counts: Vec<f64> = rows
            .iter()
            .map(|r| {
                r[ci]
                    .parse::<f64>()
                    .ok()
                    .filter(|c| *c >= 0.0 && c.is_finite())
                    .ok_or_else(|| AppError::data(format!("{}: bad count `{}`", opts.input.display(), r[ci])))
            })
            .collect::<AppResult<_>>()?;
        let rf = RankedFrequencies::from_counts(&counts)?;
        let ols = fit_zipf_ols(&rf)?;
        let ols_ci = bootstrap_alpha_ci(&rf, self.cfg.resamples, self.cfg.seed)?;
        let samples = rf.frequencies().to_vec();
        let x_min = opts
            .x_min
            .unwrap_or_else(|| samples.iter().copied().fold(f64::INFINITY, f64::min));
        let kept: Vec<f64> = samples.iter().copied().filter(|x| *x >= x_min).collect();
        let mle = fit_zipf_mle(&kept, x_min)?;
        let mle_ci = bootstrap_mle_ci(&kept, x_min, self.cfg.resamples, self.cfg.seed)?;
        let window = opts.window.min(rf.len());
        let rolling = rolling_window_alpha(&rf, window)?;

        let b = &self.bundle;
        b.write_json(
            files::ZIPF_JSON,
            Independent,
            &json!({
                "input": opts.input.display().to_string(),
                "n": rf.len(),
                "ols": ols,
                "ols_bootstrap_ci": ols_ci,
                "mle": {
                    "alpha": mle,
                    "se": mle_standard_error(mle, kept.len()),
                    "x_min": x_min,
                    "n_tail": kept.len(),
                    "implied_rank_exponent": 1.0 / (mle - 1.0),
                },
                "mle_bootstrap_ci": mle_ci,
                "rolling_window": window,
            }),
        )?;
        let rows: Vec<Vec<String>> = rolling.iter().map(|(c, a)| vec![fmt_f64(*c), fmt_f64(*a)]).collect();
        b.write_csv(files::ZIPF_ROLLING, Independent, &["center_rank", "alpha"], &rows)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_model_fit_on_published_table() {
        let f = per_model_fit(&published::dense_models()).unwrap();
        assert_eq!(f.models.len(), 16);
        assert!((f.cross_family.r2 - 0.794).abs() < 0.01, "{}", f.cross_family.r2);
        let fam: Vec<&str> = f.families.iter().map(|x| x.family.as_str()).collect();
        assert_eq!(fam, vec!["Gemma", "Llama", "Mistral", "Qwen"]);
    }
}

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::Value;

use super::{files, Pipeline};
use crate::error::AppResult;
use crate::output::{column, read_csv, read_json, Dependence::*};

fn num(v: &Value) -> String {
    v.as_f64().map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

fn cell3(s: &str) -> String {
    s.parse::<f64>().map_or_else(|_| s.to_string(), |x| format!("{x:.3}"))
}

impl Pipeline {
    /// Pivots and formats upstream artifacts; performs no arithmetic of its own.
    pub fn report(&self) -> AppResult<()> {
        let b = &self.bundle;
        b.require(&[
            files::ACCOUNTING_JSON,
            files::CELLS,
            files::FIT_JSON,
            files::SWEEP,
            files::TABLE1,
            files::THEORY_JSON,
            files::CITETAIL_CSV,
            files::CITETAIL_JSON,
        ])?;

        let cells_path = b.path(files::CELLS);
        let (h, rows) = read_csv(&cells_path)?;
        let (mi, ti, qi) = (
            column(&h, "model", &cells_path)?,
            column(&h, "topic", &cells_path)?,
            column(&h, "quality", &cells_path)?,
        );
        let mut topics: Vec<String> = Vec::new();
        let mut models: Vec<String> = Vec::new();
        let mut grid: BTreeMap<(String, String), String> = BTreeMap::new();
        for r in &rows {
            if !topics.contains(&r[ti]) {
                topics.push(r[ti].clone());
            }
            if !models.contains(&r[mi]) {
                models.push(r[mi].clone());
            }
            grid.insert((r[mi].clone(), r[ti].clone()), r[qi].clone());
        }
        let mut header = vec!["model"];
        header.extend(topics.iter().map(String::as_str));
        let matrix: Vec<Vec<String>> = models
            .iter()
            .map(|m| {
                let mut row = vec![m.clone()];
                row.extend(
                    topics
                        .iter()
                        .map(|t| grid.get(&(m.clone(), t.clone())).cloned().unwrap_or_default()),
                );
                row
            })
            .collect();
        b.write_csv(files::QUALITY_MATRIX, Relevance, &header, &matrix)?;

        let (sh, srows) = read_csv(&b.path(files::SWEEP))?;
        let a4: Vec<Vec<String>> = srows.iter().map(|r| r.iter().map(|c| cell3(c)).collect()).collect();
        let sh: Vec<&str> = sh.iter().map(String::as_str).collect();
        b.write_csv(files::TABLE_A4, Independent, &sh, &a4)?;

        let acct: Value = read_json(&b.path(files::ACCOUNTING_JSON))?;
        let fit: Value = read_json(&b.path(files::FIT_JSON))?;
        let theory: Value = read_json(&b.path(files::THEORY_JSON))?;
        let tail: Value = read_json(&b.path(files::CITETAIL_JSON))?;
        let (_, t1) = read_csv(&b.path(files::TABLE1))?;

        let mut s = String::new();
        let t = &acct["totals"];
        let _ = writeln!(s, "Accounting");
        let _ = writeln!(
            s,
            "  requested {}  produced {}  parse failures {}  duplicates {}  analysed {}",
            t["requested"], t["produced"], t["parse_failures"], t["duplicates"], t["analysed"]
        );
        let sig = &fit["sigmoid"];
        let _ = writeln!(s, "\nSigmoid fit (n = {})", fit["n_cells"]);
        let _ = writeln!(
            s,
            "  alpha {} (SE {})  beta {} (SE {})  gamma {} (SE {})  R2 {}",
            num(&sig["alpha"]),
            num(&sig["se_alpha"]),
            num(&sig["beta"]),
            num(&sig["se_beta"]),
            num(&sig["gamma"]),
            num(&sig["se_gamma"]),
            num(&sig["r2"])
        );
        for (label, key) in [("sigmoid", "sigmoid"), ("log-linear", "ols")] {
            let d = &fit["decomposition"][key];
            let _ = writeln!(
                s,
                "  {label}: size-only R2 {}  + works R2 {}  F {} (p {})",
                num(&d["r2_size"]),
                num(&d["r2_increment"]),
                num(&d["f_test"]["f"]),
                num(&d["f_test"]["p_value"])
            );
        }
        let _ = writeln!(
            s,
            "  log10 params (billions) for quality 0.9 at 32 works: {}",
            num(&fit["extrapolation"]["log10_params_billions"])
        );
        let _ = writeln!(
            s,
            "\nReference slopes (observed slope {})",
            num(&theory["observed_slope"])
        );
        for r in &t1 {
            let _ = writeln!(s, "  alpha_Z {}  m_max {}  efficiency {}", r[0], r[2], cell3(&r[3]));
        }
        let _ = writeln!(
            s,
            "  interference floor log-slope {}",
            num(&theory["interference_floor"]["log_slope"])
        );
        let _ = writeln!(s, "\nPartial-weight sweep");
        for r in &a4 {
            let _ = writeln!(s, "  {}", r.join("  "));
        }
        let g = &tail["gradient"];
        let _ = writeln!(
            s,
            "\nCitation gradient: slope {}  R2 {}  Spearman {} (p {})  models {}  excluded {}",
            num(&tail["slope"]),
            num(&g["fit"]["r2"]),
            num(&g["spearman"]["rho"]),
            num(&g["spearman"]["p_value"]),
            g["models"].as_array().map_or(0, Vec::len),
            g["excluded"].as_array().map_or(0, Vec::len)
        );
        b.write_text(files::SUMMARY, Relevance, &s)?;
        Ok(())
    }
}

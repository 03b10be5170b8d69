//! Agreement between an automated verdict and human labels.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts with "real" as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix2x2 {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionStats {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
}

impl ConfusionMatrix2x2 {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn transpose(&self) -> Self {
        ConfusionMatrix2x2 {
            tp: self.tp,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tn,
        }
    }

    /// Rows are the predicted class, columns the reference class.
    pub fn table(&self) -> [[u64; 2]; 2] {
        [[self.tp, self.fp], [self.fn_, self.tn]]
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn confusion_stats(cm: &ConfusionMatrix2x2) -> Result<ConfusionStats> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Undefined("empty confusion matrix"));
    }
    Ok(ConfusionStats {
        accuracy: (cm.tp + cm.tn) as f64 / total as f64,
        precision: ratio(cm.tp, cm.tp + cm.fp),
        recall: ratio(cm.tp, cm.tp + cm.fn_),
        specificity: ratio(cm.tn, cm.tn + cm.fp),
    })
}

pub fn cohen_kappa(cm: &ConfusionMatrix2x2) -> Result<f64> {
    let t = cm.table();
    kappa_table(&[&t[0][..], &t[1][..]])
}

fn marginals(table: &[&[u64]]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let k = table.len();
    if k == 0 || table.iter().any(|r| r.len() != k) {
        return Err(Error::invalid("agreement table must be square"));
    }
    let total: u64 = table.iter().flat_map(|r| r.iter()).sum();
    if total == 0 {
        return Err(Error::Undefined("empty agreement table"));
    }
    let rows = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let cols = (0..k).map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
    Ok((rows, cols, total as f64))
}

/// Unweighted Cohen's κ for a square k×k table.
pub fn kappa_table(table: &[&[u64]]) -> Result<f64> {
    let (rows, cols, n) = marginals(table)?;
    let po = (0..table.len()).map(|i| table[i][i] as f64).sum::<f64>() / n;
    let pe = rows.iter().zip(&cols).map(|(r, c)| r * c).sum::<f64>() / (n * n);
    if pe >= 1.0 {
        return Err(Error::Undefined("kappa with chance agreement equal to 1"));
    }
    Ok((po - pe) / (1.0 - pe))
}

/// Linearly weighted κ over an ordered scale (row/column order NO, PARTIAL, YES).
pub fn weighted_kappa_3level(table: &[[u64; 3]; 3]) -> Result<f64> {
    let rows: [&[u64]; 3] = [&table[0], &table[1], &table[2]];
    weighted_kappa_linear(&rows)
}

pub fn weighted_kappa_linear(table: &[&[u64]]) -> Result<f64> {
    let (rows, cols, n) = marginals(table)?;
    let k = table.len();
    if k < 2 {
        return Err(Error::invalid("weighted kappa needs at least two categories"));
    }
    let w = |i: usize, j: usize| (i as f64 - j as f64).abs() / (k - 1) as f64;
    let (mut obs, mut exp) = (0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            obs += w(i, j) * table[i][j] as f64 / n;
            exp += w(i, j) * rows[i] * cols[j] / (n * n);
        }
    }
    if exp == 0.0 {
        return Err(Error::Undefined("weighted kappa with zero expected disagreement"));
    }
    Ok(1.0 - obs / exp)
}

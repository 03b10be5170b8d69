use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::math::sqrt;

/// Linear least-squares fit with an intercept.
///
/// `coefficients[0]` is the intercept, followed by one slope per predictor
/// column. `r2` is the (weighted) coefficient of determination; it is set to
/// 0 when the response has no variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub r2: f64,
    pub rss: f64,
    pub tss: f64,
    pub n: usize,
}

impl OlsFit {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }

    pub fn slope(&self) -> f64 {
        self.coefficients[1]
    }

    pub fn n_params(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.coefficients[0] + x.iter().zip(&self.coefficients[1..]).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Ordinary least squares of `y` on the predictor columns in `xs`.
pub fn fit_ols(xs: &[&[f64]], y: &[f64]) -> Result<OlsFit> {
    fit_wls(xs, y, None)
}

/// Weighted least squares; `weights = None` is ordinary least squares.
pub fn fit_wls(xs: &[&[f64]], y: &[f64], weights: Option<&[f64]>) -> Result<OlsFit> {
    let n = y.len();
    let k = xs.len();
    if k == 0 {
        return Err(Error::invalid("at least one predictor column required"));
    }
    if n <= k + 1 {
        return Err(Error::TooFewPoints { needed: k + 2, got: n });
    }
    if xs.iter().any(|c| c.len() != n) {
        return Err(Error::invalid("predictor and response lengths differ"));
    }
    let ones;
    let w: &[f64] = match weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::invalid("weight length differs from response"));
            }
            if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(Error::invalid("weights must be positive and finite"));
            }
            w
        }
        None => {
            ones = vec![1.0; n];
            &ones
        }
    };

    let sw: f64 = w.iter().sum();
    let wmean = |v: &[f64]| v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let xbar: Vec<f64> = xs.iter().map(|c| wmean(c)).collect();
    let ybar = wmean(y);

    let mut sxx = vec![0.0; k * k];
    let mut sxy = vec![0.0; k];
    for i in 0..n {
        let dy = y[i] - ybar;
        for a in 0..k {
            let da = xs[a][i] - xbar[a];
            sxy[a] += w[i] * da * dy;
            for b in 0..=a {
                sxx[a * k + b] += w[i] * da * (xs[b][i] - xbar[b]);
            }
        }
    }
    for a in 0..k {
        if sxx[a * k + a] == 0.0 {
            return Err(Error::ConstantPredictor(a));
        }
        for b in 0..a {
            sxx[b * k + a] = sxx[a * k + b];
        }
    }
    let slopes = linalg::cholesky_solve(&sxx, k, &sxy)?;
    let intercept = ybar - slopes.iter().zip(&xbar).map(|(b, m)| b * m).sum::<f64>();

    let (mut rss, mut tss) = (0.0, 0.0);
    for i in 0..n {
        let fitted = intercept + (0..k).map(|a| slopes[a] * xs[a][i]).sum::<f64>();
        rss += w[i] * (y[i] - fitted) * (y[i] - fitted);
        tss += w[i] * (y[i] - ybar) * (y[i] - ybar);
    }
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };

    let sigma2 = rss / (n - k - 1) as f64;
    let inv = linalg::inverse_spd(&sxx, k)?;
    let mut var_intercept = 1.0 / sw;
    for a in 0..k {
        for b in 0..k {
            var_intercept += xbar[a] * inv[a * k + b] * xbar[b];
        }
    }
    let mut std_errors = Vec::with_capacity(k + 1);
    std_errors.push(sqrt(sigma2 * var_intercept));
    std_errors.extend((0..k).map(|a| sqrt(sigma2 * inv[a * k + a])));

    let mut coefficients = Vec::with_capacity(k + 1);
    coefficients.push(intercept);
    coefficients.extend(slopes);
    Ok(OlsFit {
        coefficients,
        std_errors,
        r2,
        rss,
        tss,
        n,
    })
}

/// Inverse-variance weighted straight-line fit of `y` on `x`, with
/// weights `1/se²`.
pub fn weighted_loglog_fit(x: &[f64], y: &[f64], se: &[f64]) -> Result<OlsFit> {
    if x.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: x.len(),
        });
    }
    if se.len() != x.len() {
        return Err(Error::invalid("standard-error length differs from data"));
    }
    if se.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::invalid("standard errors must be > 0"));
    }
    let w: Vec<f64> = se.iter().map(|s| 1.0 / (s * s)).collect();
    fit_wls(&[x], y, Some(&w))
}

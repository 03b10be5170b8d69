//! Power-law exponent estimation for rank–frequency data.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitlab::bootstrap::{bootstrap_ci, BootstrapCI};
use crate::fitlab::ols::fit_ols;
use crate::math::{ln, log10};

/// Frequencies ordered by rank 1..n, non-increasing and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFrequencies {
    freqs: Vec<f64>,
}

impl RankedFrequencies {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        if freqs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::invalid("frequencies must be positive and finite"));
        }
        if freqs.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("frequencies must be non-increasing in rank"));
        }
        Ok(RankedFrequencies { freqs })
    }

    /// Sorts raw counts descending; equal counts keep their input order.
    /// Zero counts are dropped.
    pub fn from_counts(counts: &[f64]) -> Result<Self> {
        let mut v: Vec<f64> = counts.iter().copied().filter(|c| *c != 0.0).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        Self::new(v)
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    /// `(rank, frequency)` pairs, ranks starting at 1.
    pub fn items(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.freqs.iter().enumerate().map(|(i, f)| (i + 1, *f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfOls {
    pub alpha: f64,
    pub se: f64,
    pub r2: f64,
    pub n: usize,
}

fn ols_on(ranks: &[f64], freqs: &[f64]) -> Result<ZipfOls> {
    let lk: Vec<f64> = ranks.iter().map(|k| log10(*k)).collect();
    let lf: Vec<f64> = freqs.iter().map(|f| log10(*f)).collect();
    let fit = fit_ols(&[&lk], &lf)?;
    Ok(ZipfOls {
        alpha: -fit.slope(),
        se: fit.std_errors[1],
        r2: fit.r2,
        n: freqs.len(),
    })
}

/// Negated slope of log f on log k.
pub fn fit_zipf_ols(rf: &RankedFrequencies) -> Result<ZipfOls> {
    if rf.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: rf.len(),
        });
    }
    let ranks: Vec<f64> = (1..=rf.len()).map(|k| k as f64).collect();
    ols_on(&ranks, rf.frequencies())
}

/// Continuous power-law MLE: α̂ = 1 + n / Σ ln(xᵢ/x_min).
pub fn fit_zipf_mle(samples: &[f64], x_min: f64) -> Result<f64> {
    if !(x_min > 0.0) {
        return Err(Error::invalid("x_min must be positive"));
    }
    if samples.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if samples.iter().any(|x| !(*x >= x_min) || !x.is_finite()) {
        return Err(Error::invalid("all samples must be finite and at least x_min"));
    }
    let s: f64 = samples.iter().map(|x| ln(x / x_min)).sum();
    if s <= 0.0 {
        return Err(Error::Undefined("MLE exponent with every sample at x_min"));
    }
    Ok(1.0 + samples.len() as f64 / s)
}

/// Standard error of the continuous MLE, (α̂ − 1)/√n.
pub fn mle_standard_error(alpha: f64, n: usize) -> f64 {
    (alpha - 1.0) / libm::sqrt(n as f64)
}

/// Bootstrap CI of the OLS exponent, resampling (rank, frequency) pairs.
pub fn bootstrap_alpha_ci(rf: &RankedFrequencies, resamples: usize, seed: u64) -> Result<BootstrapCI> {
    if rf.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: rf.len(),
        });
    }
    let pairs: Vec<(f64, f64)> = rf.items().map(|(k, f)| (k as f64, f)).collect();
    let est = |s: &[(f64, f64)]| -> Result<f64> {
        let k: Vec<f64> = s.iter().map(|p| p.0).collect();
        let f: Vec<f64> = s.iter().map(|p| p.1).collect();
        ols_on(&k, &f).map(|z| z.alpha)
    };
    let mut ci = bootstrap_ci(&pairs, est, resamples, seed)?;
    ci.point = fit_zipf_ols(rf)?.alpha;
    Ok(ci)
}

/// Bootstrap CI of the continuous MLE, resampling observations.
pub fn bootstrap_mle_ci(samples: &[f64], x_min: f64, resamples: usize, seed: u64) -> Result<BootstrapCI> {
    bootstrap_ci(samples, |s| fit_zipf_mle(s, x_min), resamples, seed)
}

/// Local OLS exponent over each contiguous window of ranks, stepping by one.
/// Returns `(center rank, alpha)` with center = midpoint of the window.
pub fn rolling_window_alpha(rf: &RankedFrequencies, window: usize) -> Result<Vec<(f64, f64)>> {
    if window < 3 || window > rf.len() {
        return Err(Error::invalid("window must satisfy 3 <= window <= n"));
    }
    let ranks: Vec<f64> = (1..=rf.len()).map(|k| k as f64).collect();
    (0..=rf.len() - window)
        .map(|start| {
            let end = start + window;
            let a = ols_on(&ranks[start..end], &rf.frequencies()[start..end])?.alpha;
            Ok(((ranks[start] + ranks[end - 1]) / 2.0, a))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::pow;

    fn power_law(n: usize, alpha: f64, c: f64) -> RankedFrequencies {
        RankedFrequencies::new((1..=n).map(|k| c * pow(k as f64, -alpha)).collect()).unwrap()
    }

    #[test]
    fn exact_power_law() {
        let z = fit_zipf_ols(&power_law(200, 1.5, 1.0)).unwrap();
        assert!((z.alpha - 1.5).abs() < 1e-12);
        assert!((z.r2 - 1.0).abs() < 1e-12);
        let z = fit_zipf_ols(&power_law(200, 1.23, 7e5)).unwrap();
        assert!((z.alpha - 1.23).abs() < 1e-12);
    }

    #[test]
    fn zero_frequency_rejected() {
        assert!(RankedFrequencies::new(alloc::vec![3.0, 1.0, 0.0]).is_err());
        assert!(RankedFrequencies::new(alloc::vec![1.0, 3.0]).is_err());
    }

    #[test]
    fn mle_closed_forms() {
        let e = core::f64::consts::E;
        assert!((fit_zipf_mle(&[e * 2.0; 7], 2.0).unwrap() - 2.0).abs() < 1e-12);
        let one = fit_zipf_mle(&[2.0], 1.0).unwrap();
        assert!((one - (1.0 + 1.0 / core::f64::consts::LN_2)).abs() < 1e-12);
        assert!(fit_zipf_mle(&[3.0, 3.0], 3.0).is_err());
        assert!(fit_zipf_mle(&[1.0], 2.0).is_err());
    }

    #[test]
    fn from_counts_stable_ties() {
        let rf = RankedFrequencies::from_counts(&[2.0, 5.0, 2.0, 0.0, 9.0]).unwrap();
        assert_eq!(rf.frequencies(), &[9.0, 5.0, 2.0, 2.0]);
    }

    #[test]
    fn rolling_reductions() {
        let rf = power_law(50, 1.23, 3.0);
        let prof = rolling_window_alpha(&rf, 10).unwrap();
        assert_eq!(prof.len(), 41);
        assert!(prof.iter().all(|p| (p.1 - 1.23).abs() < 1e-9));
        let full = rolling_window_alpha(&rf, 50).unwrap();
        assert_eq!(full.len(), 1);
        assert!((full[0].1 - fit_zipf_ols(&rf).unwrap().alpha).abs() < 1e-12);
        assert!(rolling_window_alpha(&rf, 2).is_err());
        assert!(rolling_window_alpha(&rf, 51).is_err());
    }

    #[test]
    fn zero_noise_ci_has_zero_width() {
        let ci = bootstrap_alpha_ci(&power_law(100, 1.23, 1.0), 300, 4).unwrap();
        assert!((ci.lower - 1.23).abs() < 1e-9 && (ci.upper - 1.23).abs() < 1e-9);
    }
}

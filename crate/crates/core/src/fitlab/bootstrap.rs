use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{median, median_sorted, quantile_sorted};
use crate::rng::substream;

pub const DEFAULT_RESAMPLES: usize = 10_000;

/// Percentile-method bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl BootstrapCI {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Resamples `data` with replacement `resamples` times and returns the
/// 2.5/97.5 percentiles of `estimator` over the resamples. Resample `b`
/// draws from substream `b` of `seed`.
pub fn bootstrap_ci<T: Clone>(
    data: &[T],
    estimator: impl Fn(&[T]) -> Result<f64>,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapCI> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    if resamples == 0 {
        return Err(Error::invalid("resamples must be > 0"));
    }
    let point = estimator(data)?;
    let mut scratch: Vec<T> = data.to_vec();
    let mut stats = Vec::with_capacity(resamples);
    for b in 0..resamples {
        let mut rng = substream(seed, b as u64);
        for slot in scratch.iter_mut() {
            *slot = data[rng.random_range(0..n)].clone();
        }
        stats.push(estimator(&scratch)?);
    }
    stats.sort_by(f64::total_cmp);
    Ok(BootstrapCI {
        point,
        lower: quantile_sorted(&stats, 0.025),
        upper: quantile_sorted(&stats, 0.975),
        level: 0.95,
        resamples,
        seed,
    })
}

pub fn bootstrap_median_ci(values: &[f64], resamples: usize, seed: u64) -> Result<BootstrapCI> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value"));
    }
    bootstrap_ci(
        values,
        |s| {
            let mut v = s.to_vec();
            v.sort_by(f64::total_cmp);
            Ok(median_sorted(&v))
        },
        resamples,
        seed,
    )
    .map(|mut ci| {
        ci.point = median(values);
        ci
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values_zero_width() {
        let ci = bootstrap_median_ci(&[4.0; 12], 500, 1).unwrap();
        assert_eq!((ci.lower, ci.point, ci.upper), (4.0, 4.0, 4.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let v: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64).collect();
        let a = bootstrap_median_ci(&v, 2000, 9).unwrap();
        let b = bootstrap_median_ci(&v, 2000, 9).unwrap();
        assert_eq!(a.lower.to_bits(), b.lower.to_bits());
        assert_eq!(a.upper.to_bits(), b.upper.to_bits());
        assert!(a.lower <= a.point && a.point <= a.upper);
    }

    #[test]
    fn too_few() {
        assert!(bootstrap_median_ci(&[1.0], 10, 0).is_err());
    }
}

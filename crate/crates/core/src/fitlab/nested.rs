use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::f_upper_tail;

use super::logistic::LogisticFit;
use super::ols::OlsFit;

/// A least-squares fit that can take part in a nested-model comparison.
pub trait NestedModel {
    fn rss(&self) -> f64;
    fn n_obs(&self) -> usize;
    /// Number of fitted coefficients, intercept included.
    fn n_params(&self) -> usize;
}

impl NestedModel for OlsFit {
    fn rss(&self) -> f64 {
        self.rss
    }
    fn n_obs(&self) -> usize {
        self.n
    }
    fn n_params(&self) -> usize {
        self.coefficients.len()
    }
}

impl NestedModel for LogisticFit {
    fn rss(&self) -> f64 {
        self.rss
    }
    fn n_obs(&self) -> usize {
        self.n
    }
    fn n_params(&self) -> usize {
        self.coefficients.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FTest {
    pub f: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub p_value: f64,
}

/// F = ((RSS_red − RSS_full)/Δp) / (RSS_full/(n − p_full)).
pub fn incremental_f<F: NestedModel, R: NestedModel>(full: &F, reduced: &R) -> Result<FTest> {
    if full.n_obs() != reduced.n_obs() {
        return Err(Error::invalid("nested fits must share the same observations"));
    }
    if full.n_params() <= reduced.n_params() {
        return Err(Error::invalid(
            "full model must have more coefficients than the reduced model",
        ));
    }
    let n = full.n_obs();
    if n <= full.n_params() {
        return Err(Error::TooFewPoints {
            needed: full.n_params() + 1,
            got: n,
        });
    }
    if full.rss() == 0.0 {
        return Err(Error::Undefined("F statistic with zero full-model residual"));
    }
    let df_num = full.n_params() - reduced.n_params();
    let df_den = n - full.n_params();
    let f = ((reduced.rss() - full.rss()) / df_num as f64) / (full.rss() / df_den as f64);
    Ok(FTest {
        f,
        df_num,
        df_den,
        p_value: f_upper_tail(f, df_num as f64, df_den as f64),
    })
}

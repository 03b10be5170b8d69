//! Logistic curve fitting by Levenberg–Marquardt in residual space:
//! minimizes Σ (yᵢ − σ(Σⱼ bⱼ·xᵢⱼ + c))² with an analytic Jacobian.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::math::{logit, mean, sigmoid, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmSettings {
    pub lambda0: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub max_iterations: usize,
    /// Stop when an accepted step changes RSS by less than this fraction.
    pub rel_tolerance: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        LmSettings {
            lambda0: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
            max_iterations: 200,
            rel_tolerance: 1e-12,
        }
    }
}

/// General logistic fit: `coefficients = [b_1 .. b_k, c]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub r2: f64,
    pub rss: f64,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Max-norm of Jᵀr at the returned parameters.
    pub gradient_norm: f64,
    /// RSS after the initial guess and after each accepted step.
    pub rss_trace: Vec<f64>,
}

impl LogisticFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let k = self.coefficients.len() - 1;
        sigmoid(linear_predictor(&self.coefficients, x, k))
    }
}

fn linear_predictor(theta: &[f64], x: &[f64], k: usize) -> f64 {
    theta[k] + (0..k).map(|j| theta[j] * x[j]).sum::<f64>()
}

struct Problem<'a> {
    xs: &'a [&'a [f64]],
    y: &'a [f64],
}

impl Problem<'_> {
    fn k(&self) -> usize {
        self.xs.len()
    }

    fn row(&self, i: usize, buf: &mut [f64]) {
        for (j, c) in self.xs.iter().enumerate() {
            buf[j] = c[i];
        }
    }

    fn rss(&self, theta: &[f64]) -> f64 {
        let k = self.k();
        let mut x = vec![0.0; k];
        (0..self.y.len())
            .map(|i| {
                self.row(i, &mut x);
                let r = self.y[i] - sigmoid(linear_predictor(theta, &x, k));
                r * r
            })
            .sum()
    }

    /// (JᵀJ, Jᵀr, RSS) at theta; J is the Jacobian of the model values.
    fn normal_equations(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let k = self.k();
        let p = k + 1;
        let mut jtj = vec![0.0; p * p];
        let mut jtr = vec![0.0; p];
        let mut rss = 0.0;
        let mut x = vec![0.0; k];
        let mut jrow = vec![0.0; p];
        for i in 0..self.y.len() {
            self.row(i, &mut x);
            let s = sigmoid(linear_predictor(theta, &x, k));
            let d = s * (1.0 - s);
            let r = self.y[i] - s;
            rss += r * r;
            for j in 0..k {
                jrow[j] = d * x[j];
            }
            jrow[k] = d;
            for a in 0..p {
                jtr[a] += jrow[a] * r;
                for b in 0..=a {
                    jtj[a * p + b] += jrow[a] * jrow[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                jtj[b * p + a] = jtj[a * p + b];
            }
        }
        (jtj, jtr, rss)
    }
}

/// Fits `y ≈ σ(Σ bⱼ xⱼ + c)` starting from `initial_slopes`; the intercept
/// starts where the mean linear predictor equals logit(mean y), with the
/// mean clipped to [0.01, 0.99].
pub fn fit_logistic(xs: &[&[f64]], y: &[f64], initial_slopes: &[f64], settings: &LmSettings) -> Result<LogisticFit> {
    let k = xs.len();
    let n = y.len();
    let p = k + 1;
    if k == 0 || initial_slopes.len() != k {
        return Err(Error::invalid("one initial slope per predictor required"));
    }
    if n < p + 1 {
        return Err(Error::TooFewPoints { needed: p + 1, got: n });
    }
    if xs.iter().any(|c| c.len() != n) {
        return Err(Error::invalid("predictor and response lengths differ"));
    }
    if y.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid("responses must lie in [0, 1]"));
    }
    for (j, c) in xs.iter().enumerate() {
        if c.iter().all(|v| *v == c[0]) {
            return Err(Error::ConstantPredictor(j));
        }
    }

    let problem = Problem { xs, y };
    let mut theta: Vec<f64> = initial_slopes.to_vec();
    let start = logit(mean(y).clamp(0.01, 0.99));
    let mean_slope_part: f64 = (0..k).map(|j| initial_slopes[j] * mean(xs[j])).sum();
    theta.push(start - mean_slope_part);

    let (mut jtj, mut jtr, mut rss) = problem.normal_equations(&theta);
    let mut rss_trace = vec![rss];
    let mut lambda = settings.lambda0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        iterations += 1;
        if rss <= 1e-28 * n as f64 || jtr.iter().all(|g| g.abs() < 1e-15) {
            converged = true;
            break;
        }
        let max_diag = (0..p).map(|a| jtj[a * p + a]).fold(0.0, f64::max);
        let mut damped = jtj.clone();
        for a in 0..p {
            damped[a * p + a] += lambda * jtj[a * p + a].max(1e-12 * max_diag);
        }
        let step = match linalg::cholesky_solve(&damped, p, &jtr) {
            Ok(s) => s,
            Err(_) => {
                lambda *= settings.lambda_up;
                if lambda > 1e20 {
                    break;
                }
                continue;
            }
        };
        let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + s).collect();
        let trial_rss = problem.rss(&trial);
        if trial_rss < rss {
            let rel = (rss - trial_rss) / rss;
            theta = trial;
            let ne = problem.normal_equations(&theta);
            jtj = ne.0;
            jtr = ne.1;
            rss = ne.2;
            rss_trace.push(rss);
            lambda /= settings.lambda_down;
            if rel < settings.rel_tolerance {
                converged = true;
                break;
            }
        } else {
            lambda *= settings.lambda_up;
            if lambda > 1e20 {
                // no downhill step left at working precision: accept if the
                // Gauss-Newton predicted reduction is negligible
                converged = predicted_reduction(&jtj, &jtr, p).is_some_and(|d| d <= 1e-9 * rss.max(1e-300));
                break;
            }
        }
    }

    let gradient_norm = jtr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ybar = mean(y);
    let tss: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    let sigma2 = rss / (n - p) as f64;
    let std_errors = match linalg::inverse_spd(&jtj, p) {
        Ok(inv) => (0..p).map(|a| sqrt(sigma2 * inv[a * p + a])).collect(),
        Err(_) => vec![f64::NAN; p],
    };

    Ok(LogisticFit {
        coefficients: theta,
        std_errors,
        r2,
        rss,
        n,
        converged,
        iterations,
        gradient_norm,
        rss_trace,
    })
}

/// gᵀ(JᵀJ)⁻¹g, the RSS decrease promised by a full Gauss-Newton step.
fn predicted_reduction(jtj: &[f64], jtr: &[f64], p: usize) -> Option<f64> {
    let step = linalg::cholesky_solve(jtj, p, jtr).ok()?;
    Some(step.iter().zip(jtr).map(|(a, b)| a * b).sum())
}

/// Cluster-robust (sandwich) standard errors for a logistic fit, with
/// observations grouped by `clusters[i]`.
pub fn cluster_robust_se(fit: &LogisticFit, xs: &[&[f64]], y: &[f64], clusters: &[usize]) -> Result<Vec<f64>> {
    let k = xs.len();
    let p = k + 1;
    if clusters.len() != y.len() {
        return Err(Error::invalid("one cluster id per observation required"));
    }
    let problem = Problem { xs, y };
    let (jtj, _, _) = problem.normal_equations(&fit.coefficients);
    let bread = linalg::inverse_spd(&jtj, p)?;
    let n_clusters = clusters.iter().copied().max().map_or(0, |m| m + 1);
    let mut scores = vec![0.0; n_clusters * p];
    let mut x = vec![0.0; k];
    for i in 0..y.len() {
        problem.row(i, &mut x);
        let s = sigmoid(linear_predictor(&fit.coefficients, &x, k));
        let d = s * (1.0 - s) * (y[i] - s);
        let g = clusters[i];
        for j in 0..k {
            scores[g * p + j] += d * x[j];
        }
        scores[g * p + k] += d;
    }
    let mut meat = vec![0.0; p * p];
    for g in 0..n_clusters {
        let sg = &scores[g * p..(g + 1) * p];
        for a in 0..p {
            for b in 0..p {
                meat[a * p + b] += sg[a] * sg[b];
            }
        }
    }
    let mut se = Vec::with_capacity(p);
    for a in 0..p {
        let mut v = 0.0;
        for i in 0..p {
            for j in 0..p {
                v += bread[a * p + i] * meat[i * p + j] * bread[j * p + a];
            }
        }
        se.push(sqrt(v));
    }
    Ok(se)
}

/// quality ≈ σ(α·log₁₀P + β·log₁₀S + γ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmoidFit {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub se_alpha: f64,
    pub se_beta: f64,
    pub se_gamma: f64,
    pub r2: f64,
    pub rss: f64,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl SigmoidFit {
    /// Fit constructed from known parameters (e.g. published values).
    pub fn from_params(alpha: f64, beta: f64, gamma: f64) -> Self {
        SigmoidFit {
            alpha,
            beta,
            gamma,
            se_alpha: 0.0,
            se_beta: 0.0,
            se_gamma: 0.0,
            r2: f64::NAN,
            rss: f64::NAN,
            n: 0,
            converged: true,
            iterations: 0,
        }
    }

    pub fn z(&self, log10_p: f64, log10_s: f64) -> f64 {
        self.alpha * log10_p + self.beta * log10_s + self.gamma
    }

    pub fn predict(&self, log10_p: f64, log10_s: f64) -> f64 {
        sigmoid(self.z(log10_p, log10_s))
    }
}

/// Two-predictor sigmoid fit over `(log10_P, log10_S, quality)` cells.
pub fn fit_sigmoid(cells: &[(f64, f64, f64)]) -> Result<SigmoidFit> {
    fit_sigmoid_with(cells, &LmSettings::default()).map(|(s, _)| s)
}

pub fn fit_sigmoid_with(cells: &[(f64, f64, f64)], settings: &LmSettings) -> Result<(SigmoidFit, LogisticFit)> {
    if cells.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            got: cells.len(),
        });
    }
    let lp: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let ls: Vec<f64> = cells.iter().map(|c| c.1).collect();
    let q: Vec<f64> = cells.iter().map(|c| c.2).collect();
    let fit = fit_logistic(&[&lp, &ls], &q, &[1.0, 0.5], settings)?;
    let c = &fit.coefficients;
    let se = &fit.std_errors;
    Ok((
        SigmoidFit {
            alpha: c[0],
            beta: c[1],
            gamma: c[2],
            se_alpha: se[0],
            se_beta: se[1],
            se_gamma: se[2],
            r2: fit.r2,
            rss: fit.rss,
            n: fit.n,
            converged: fit.converged,
            iterations: fit.iterations,
        },
        fit,
    ))
}

/// Single-predictor sigmoid on log₁₀P only (the reduced model of the
/// variance decomposition).
pub fn fit_sigmoid_size_only(cells: &[(f64, f64, f64)]) -> Result<LogisticFit> {
    let lp: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let q: Vec<f64> = cells.iter().map(|c| c.2).collect();
    fit_logistic(&[&lp], &q, &[1.0], &LmSettings::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(alpha: f64, beta: f64, gamma: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for i in 0..16 {
            for j in 0..24 {
                let lp = i as f64 * 0.2;
                let ls = 1.5 + j as f64 * 0.2;
                out.push((lp, ls, sigmoid(alpha * lp + beta * ls + gamma)));
            }
        }
        out
    }

    #[test]
    fn noise_free_recovery() {
        let f = fit_sigmoid(&grid(1.48, 0.46, -5.19)).unwrap();
        assert!(f.converged);
        assert!((f.alpha - 1.48).abs() < 1e-6, "{f:?}");
        assert!((f.beta - 0.46).abs() < 1e-6);
        assert!((f.gamma + 5.19).abs() < 1e-6);
        assert!((f.r2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn flat_response() {
        let cells: Vec<_> = grid(0.0, 0.0, 0.0);
        let f = fit_sigmoid(&cells).unwrap();
        assert!(f.alpha.abs() < 1e-6 && f.beta.abs() < 1e-6 && f.gamma.abs() < 1e-6);
        assert_eq!(f.r2, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let mut cells = grid(1.0, 0.5, -3.0);
        assert!(fit_sigmoid(&cells[..3]).is_err());
        for c in cells.iter_mut() {
            c.0 = 2.0;
        }
        assert!(matches!(fit_sigmoid(&cells), Err(Error::ConstantPredictor(0))));
        cells[0] = (1.0, 2.0, 1.5);
        assert!(fit_sigmoid(&cells).is_err());
    }

    #[test]
    fn trace_non_increasing() {
        let mut cells = grid(1.2, 0.4, -4.0);
        for (i, c) in cells.iter_mut().enumerate() {
            c.2 = (c.2 + 0.05 * (((i * 7919) % 13) as f64 / 6.0 - 1.0)).clamp(0.0, 1.0);
        }
        let (_, fit) = fit_sigmoid_with(&cells, &LmSettings::default()).unwrap();
        assert!(fit.rss_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(fit.converged);
        assert!(fit.gradient_norm < 1e-6);
        assert!(fit.std_errors.iter().all(|s| *s > 0.0));
    }

    #[test]
    fn cluster_robust_runs() {
        let cells = grid(1.0, 0.3, -3.0);
        let lp: Vec<f64> = cells.iter().map(|c| c.0).collect();
        let ls: Vec<f64> = cells.iter().map(|c| c.1).collect();
        let q: Vec<f64> = cells.iter().map(|c| (c.2 + 0.01).min(1.0)).collect();
        let fit = fit_logistic(&[&lp, &ls], &q, &[1.0, 0.5], &LmSettings::default()).unwrap();
        let clusters: Vec<usize> = (0..cells.len()).map(|i| i / 24).collect();
        let se = cluster_robust_se(&fit, &[&lp, &ls], &q, &clusters).unwrap();
        assert_eq!(se.len(), 3);
        assert!(se.iter().all(|s| s.is_finite()));
    }
}

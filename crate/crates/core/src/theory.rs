//! Superposition signal-to-noise model of factual recall.
//!
//! `P` is in billions of parameters throughout, matching the fitted
//! sigmoid's unit convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitlab::logistic::SigmoidFit;
use crate::fitlab::ols::fit_ols;
use crate::math::{abs, ln, log10, logit, pow, sigmoid, sqrt};
use crate::rng::{standard_normal, substream};
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryExponents {
    pub alpha_z: f64,
    pub beta_s: f64,
    pub gamma_e: f64,
    pub delta: f64,
    pub c0: f64,
    /// Proportionality constant `C` of the closed-form recall fraction.
    pub q_scale: f64,
}

impl Default for TheoryExponents {
    fn default() -> Self {
        TheoryExponents {
            alpha_z: 1.23,
            beta_s: 1.0,
            gamma_e: 1.0,
            delta: 1.0,
            c0: 1.0,
            q_scale: 1.0,
        }
    }
}

impl TheoryExponents {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.beta_s, self.gamma_e, self.delta, self.c0, self.q_scale];
        if !(self.alpha_z > 1.0) || positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::invalid("theory exponents must be positive with alpha_Z > 1"));
        }
        if self.gamma_e > 1.0 || self.delta > 1.0 {
            return Err(Error::invalid("gamma_e and delta must lie in (0, 1]"));
        }
        Ok(())
    }

    /// d log Q / d log P.
    pub fn params_exponent(&self) -> f64 {
        self.gamma_e / (2.0 * self.alpha_z * self.beta_s)
    }

    /// d log Q / d log S.
    pub fn content_exponent(&self) -> f64 {
        self.delta / self.alpha_z
    }

    /// `C = c₀^{1/α_Z} / M`, the scale at which the closed form tracks the
    /// threshold simulator over an inventory of `m` concepts.
    pub fn calibrated(mut self, m: u64) -> Self {
        self.q_scale = pow(self.c0, 1.0 / self.alpha_z) / m as f64;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub m: u64,
    pub p: f64,
    pub s: f64,
    pub exponents: TheoryExponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityLink {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedForm {
    pub m: f64,
    pub n: f64,
    pub c: f64,
    /// Ceiling-regime distortion exponents: 1 − quality ∝ P^{−m'}·S^{−n'}.
    pub m_ceiling: f64,
    pub n_ceiling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Floor,
    Ramp,
    Ceiling,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Floor => "floor",
            Regime::Ramp => "ramp",
            Regime::Ceiling => "ceiling",
        }
    }
}

pub const REGIME_CUTOFF: f64 = 2.0;

/// Q = C·P^{γe/(2αZβs)}·S^{δ/αZ}. Values above 1 indicate saturation.
pub fn recall_fraction(p: f64, s: f64, e: &TheoryExponents) -> Result<f64> {
    if !(p > 0.0 && s > 0.0) {
        return Err(Error::invalid("P and S must be positive"));
    }
    Ok(e.q_scale * pow(p, e.params_exponent()) * pow(s, e.content_exponent()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub k_star: u64,
    pub q: f64,
}

/// Threshold scan over ranks 1..M: concept k is recalled while
/// (c₀·S^δ·k^{−αZ})^{βs} exceeds the interference floor P^{−γe/2}.
pub fn simulate_recall(cfg: &SimConfig) -> Result<SimOutcome> {
    let e = &cfg.exponents;
    if cfg.m == 0 || !(cfg.p > 0.0 && cfg.s > 0.0) {
        return Err(Error::invalid("simulation needs M >= 1 and positive P, S"));
    }
    let base = e.beta_s * (ln(e.c0) + e.delta * ln(cfg.s));
    let floor = -e.gamma_e / 2.0 * ln(cfg.p);
    let mut k_star = 0;
    for k in 1..=cfg.m {
        let signal = base - e.beta_s * e.alpha_z * ln(k as f64);
        if signal > floor {
            k_star = k;
        } else {
            break;
        }
    }
    Ok(SimOutcome {
        k_star,
        q: k_star as f64 / cfg.m as f64,
    })
}

/// Mean |⟨vᵢ, vⱼ⟩| over all pairs of `m` random unit vectors in `n`
/// dimensions, averaged over `trials` independent draws.
pub fn interference_floor(n: usize, m: usize, trials: usize, seed: u64) -> Result<f64> {
    if n == 0 || m < 2 || trials == 0 {
        return Err(Error::invalid("interference floor needs N >= 1, M >= 2, trials >= 1"));
    }
    let mut total = 0.0;
    let mut vecs = alloc::vec![0.0f64; n * m];
    for t in 0..trials {
        let mut rng = substream(seed, t as u64);
        for v in vecs.chunks_mut(n) {
            let mut norm2 = 0.0;
            while norm2 == 0.0 {
                for x in v.iter_mut() {
                    *x = standard_normal(&mut rng);
                }
                norm2 = v.iter().map(|x| x * x).sum();
            }
            let r = 1.0 / sqrt(norm2);
            v.iter_mut().for_each(|x| *x *= r);
        }
        let mut acc = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                let dot: f64 = vecs[i * n..(i + 1) * n]
                    .iter()
                    .zip(&vecs[j * n..(j + 1) * n])
                    .map(|(a, b)| a * b)
                    .sum();
                acc += abs(dot);
            }
        }
        total += acc / (m * (m - 1) / 2) as f64;
    }
    Ok(total / trials as f64)
}

pub fn quality_from_q(q: f64, link: &QualityLink) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::invalid("Q must be positive"));
    }
    Ok(sigmoid(link.a * log10(q) + link.b))
}

pub fn linearize(fit: &SigmoidFit) -> LinearizedForm {
    LinearizedForm {
        m: fit.alpha / 4.0,
        n: fit.beta / 4.0,
        c: 0.5 + fit.gamma / 4.0,
        m_ceiling: fit.alpha / core::f64::consts::LN_10,
        n_ceiling: fit.beta / core::f64::consts::LN_10,
    }
}

/// m_max = 1/(2αZ).
pub fn reference_slope(alpha_z: f64) -> Result<f64> {
    if !(alpha_z > 0.0) {
        return Err(Error::invalid("alpha_Z must be positive"));
    }
    Ok(1.0 / (2.0 * alpha_z))
}

pub fn efficiency(m: f64, m_max: f64) -> f64 {
    m / m_max
}

pub fn classify_regime(z: f64) -> Regime {
    if z < -REGIME_CUTOFF {
        Regime::Floor
    } else if z > REGIME_CUTOFF {
        Regime::Ceiling
    } else {
        Regime::Ramp
    }
}

/// n_eff = β·q·(1 − q).
pub fn content_sensitivity(q: f64, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid("quality must lie in [0, 1]"));
    }
    Ok(beta * q * (1.0 - q))
}

/// log₁₀P (billions) reaching `quality_target` at works count `s`.
pub fn required_params_log10(quality_target: f64, s: f64, fit: &SigmoidFit) -> Result<f64> {
    if !(quality_target > 0.0 && quality_target < 1.0) {
        return Err(Error::invalid("quality target must lie strictly inside (0, 1)"));
    }
    if !(fit.alpha > 0.0) || !(s > 0.0) {
        return Err(Error::invalid("required_params needs alpha > 0 and S > 0"));
    }
    Ok((logit(quality_target) - fit.beta * log10(s) - fit.gamma) / fit.alpha)
}

/// Parameters in billions reaching `quality_target` at works count `s`.
pub fn required_params(quality_target: f64, s: f64, fit: &SigmoidFit) -> Result<f64> {
    required_params_log10(quality_target, s, fit).map(|l| pow(10.0, l))
}

/// log₁₀S* at which quality crosses 0.5 for `p` billion parameters.
pub fn required_content(p: f64, fit: &SigmoidFit) -> Result<f64> {
    if !(fit.beta > 0.0) {
        return Err(Error::invalid("required_content needs beta > 0"));
    }
    if !(p > 0.0) {
        return Err(Error::invalid("P must be positive"));
    }
    Ok(-(fit.alpha * log10(p) + fit.gamma) / fit.beta)
}

/// One row of a simulator sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub log10_p: f64,
    pub log10_s: f64,
    pub q: f64,
    pub quality: f64,
}

/// Simulates recall at `steps` log-spaced P values between 10^lo and 10^hi.
pub fn simulate_sweep(
    m: u64,
    s: f64,
    log10_p_range: (f64, f64),
    steps: usize,
    exponents: &TheoryExponents,
    link: &QualityLink,
) -> Result<Vec<SweepPoint>> {
    if steps < 2 {
        return Err(Error::invalid("sweep needs at least two steps"));
    }
    let (lo, hi) = log10_p_range;
    (0..steps)
        .map(|i| {
            let lp = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
            let out = simulate_recall(&SimConfig {
                m,
                p: pow(10.0, lp),
                s,
                exponents: *exponents,
            })?;
            let quality = if out.q > 0.0 { quality_from_q(out.q, link)? } else { 0.0 };
            Ok(SweepPoint {
                log10_p: lp,
                log10_s: log10(s),
                q: out.q,
                quality,
            })
        })
        .collect()
}

/// Measured log–log slopes of simulated Q in P and in S: P (then S) steps
/// over 10^0..10^4 in quarter decades with the other held at 1, with `c0`
/// chosen so k* = `k_lo` at P = S = 1. Points at the floor or saturated are
/// dropped.
pub fn simulator_slopes(e: &TheoryExponents, m: u64, k_lo: f64) -> Result<(f64, f64)> {
    if !(k_lo >= 1.0) || (m as f64) <= k_lo {
        return Err(Error::invalid("simulator slopes need 1 <= k_lo < M"));
    }
    let exps = TheoryExponents {
        c0: pow(k_lo, e.alpha_z),
        ..*e
    };
    exps.validate()?;
    let slope = |vary_p: bool| -> Result<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..=16 {
            let l = i as f64 * 0.25;
            let v = pow(10.0, l);
            let (p, s) = if vary_p { (v, 1.0) } else { (1.0, v) };
            let out = simulate_recall(&SimConfig {
                m,
                p,
                s,
                exponents: exps,
            })?;
            if out.q > 0.0 && out.q < 1.0 {
                xs.push(l);
                ys.push(log10(out.q));
            }
        }
        Ok(fit_ols(&[&xs], &ys)?.slope())
    };
    Ok((slope(true)?, slope(false)?))
}

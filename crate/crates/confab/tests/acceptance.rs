//! Acceptance gate: thirteen criteria, each printed as PASS or FAIL.
//! Runs without the libtest harness; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use confab::pipeline::per_model_fit;
use confab::published;
use confab_core::citetail::{citation_gradient, CitationSample};
use confab_core::fitlab::rank::spearman_t_pvalue;
use confab_core::fitlab::{cohen_kappa, confusion_stats, fit_sigmoid, ConfusionMatrix2x2};
use confab_core::rng::{standard_normal, substream};
use confab_core::theory::{
    efficiency, interference_floor, recall_fraction, reference_slope, required_params, required_params_log10,
    simulate_recall, simulator_slopes, SimConfig, TheoryExponents,
};
use confab_core::verify::{authenticity_score, FieldKind, FieldVerdict, FieldVerdicts};
use confab_core::zipf::{bootstrap_mle_ci, fit_zipf_mle, fit_zipf_ols, RankedFrequencies};
use rand::Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal, StudentsT};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

/// Simple regression by the textbook sums; returns (slope, intercept, r²).
fn hand_ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx, sxy * sxy / (sxx * syy))
}

fn dense_xy() -> Vec<(String, f64, f64)> {
    published::dense_models()
        .into_iter()
        .map(|m| (m.family, m.params.unwrap().log10(), m.quality))
        .collect()
}

fn c1_cross_family() -> Outcome {
    let t = Instant::now();
    let rows = published::dense_models();
    let fit = per_model_fit(&rows).unwrap();
    let xy = dense_xy();
    let x: Vec<f64> = xy.iter().map(|r| r.1).collect();
    let y: Vec<f64> = xy.iter().map(|r| r.2).collect();
    let (_, _, r2) = hand_ols(&x, &y);
    let el = t.elapsed();
    outcome(
        rows.len() == 16
            && within(fit.cross_family.r2, 0.794, 0.01)
            && within(fit.cross_family.r2, r2, 1e-12)
            && el < Duration::from_secs(1),
        format!(
            "n={} R2={:.4} (hand {:.4}) in {el:?}",
            rows.len(),
            fit.cross_family.r2,
            r2
        ),
    )
}

fn c2_within_family() -> Outcome {
    let t = Instant::now();
    let fit = per_model_fit(&published::dense_models()).unwrap();
    let want = [
        ("Llama", 6, 0.224),
        ("Gemma", 4, 0.238),
        ("Mistral", 3, 0.218),
        ("Qwen", 3, 0.366),
    ];
    let xy = dense_xy();
    let mut ok = fit.families.len() == want.len();
    let mut parts = Vec::new();
    for (fam, n, slope) in want {
        let got = fit.families.iter().find(|f| f.family == fam);
        let x: Vec<f64> = xy.iter().filter(|r| r.0 == fam).map(|r| r.1).collect();
        let y: Vec<f64> = xy.iter().filter(|r| r.0 == fam).map(|r| r.2).collect();
        let (hand, _, _) = hand_ols(&x, &y);
        match got {
            Some(f) => {
                ok &= f.n == n && within(f.slope, slope, 0.005) && within(f.slope, hand, 1e-12);
                parts.push(format!("{fam}(n={}) {:.4}", f.n, f.slope));
            }
            None => {
                ok = false;
                parts.push(format!("{fam} missing"));
            }
        }
    }
    let el = t.elapsed();
    outcome(
        ok && el < Duration::from_secs(1),
        format!("{} in {el:?}", parts.join(", ")),
    )
}

fn c3_reference_slopes() -> Outcome {
    let f3 = |x: f64| format!("{x:.3}");
    let m: Vec<String> = [1.0, 1.23, 1.24]
        .iter()
        .map(|a| f3(reference_slope(*a).unwrap()))
        .collect();
    let e: Vec<String> = [0.407, 0.403, 0.500]
        .iter()
        .map(|mm| f3(efficiency(0.224, *mm)))
        .collect();
    let hand_m: Vec<String> = [1.0, 1.23, 1.24].iter().map(|a| f3(0.5 / a)).collect();
    outcome(
        m == ["0.500", "0.407", "0.403"] && e == ["0.550", "0.556", "0.448"] && m == hand_m,
        format!("m_max {m:?}, efficiency {e:?}"),
    )
}

fn c4_agreement() -> Outcome {
    let cm = ConfusionMatrix2x2 {
        tp: 136,
        fp: 0,
        fn_: 17,
        tn: 148,
    };
    let s = confusion_stats(&cm).unwrap();
    let k = cohen_kappa(&cm).unwrap();
    let n = 301.0;
    let po = (136.0 + 148.0) / n;
    let pe = (136.0 / n) * (153.0 / n) + (165.0 / n) * (148.0 / n);
    let hand_k = (po - pe) / (1.0 - pe);
    let caption = cm.total() == 301 && cm.tp + cm.fn_ == 153;
    let ok = caption
        && within(s.accuracy, 0.944, 0.001)
        && within(s.precision.unwrap(), 1.0, 0.001)
        && within(s.specificity.unwrap(), 1.0, 0.001)
        && within(s.recall.unwrap(), 0.889, 0.001)
        && within(k, 0.887, 0.001)
        && within(k, hand_k, 1e-12);
    outcome(
        ok,
        format!(
            "acc {:.4} prec {:.4} spec {:.4} rec {:.4} kappa {:.4} (hand {:.4})",
            s.accuracy,
            s.precision.unwrap(),
            s.specificity.unwrap(),
            s.recall.unwrap(),
            k,
            hand_k
        ),
    )
}

fn c5_spearman_p() -> Outcome {
    let p = spearman_t_pvalue(-0.79, 10);
    let t: f64 = -0.79 * (8.0f64 / (1.0 - 0.79 * 0.79)).sqrt();
    let oracle = 2.0 * StudentsT::new(0.0, 1.0, 8.0).unwrap().cdf(t);
    outcome(
        within(p, 0.007, 0.002) && within(p, oracle, 1e-9),
        format!("p={p:.5} (statrs {oracle:.5})"),
    )
}

fn c6_extrapolation() -> Outcome {
    let fit = published::sigmoid_fit();
    let lp = required_params_log10(0.9, 32.0, &fit).unwrap();
    let hand = (9f64.ln() - 0.46 * 32f64.log10() + 5.19) / 1.48;
    let params = required_params(0.9, 32.0, &fit).unwrap() * 1e9;
    outcome(
        within(lp, hand, 1e-6) && (1e13..=1e14).contains(&params),
        format!("log10 P = {lp:.6} billions (hand {hand:.6}), {params:.3e} parameters"),
    )
}

const WEIGHTS: [f64; 5] = [0.25, 0.25, 0.20, 0.15, 0.15];

fn value(v: FieldVerdict) -> Option<f64> {
    match v {
        FieldVerdict::Match => Some(1.0),
        FieldVerdict::Abbrev => Some(0.75),
        FieldVerdict::Contains => Some(0.5),
        FieldVerdict::Unconfirmed => Some(0.0),
        FieldVerdict::Contradiction => Some(-1.0),
        FieldVerdict::Absent => None,
    }
}

fn hand_score(vs: &[FieldVerdict; 5]) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (v, w) in vs.iter().zip(WEIGHTS) {
        if let Some(x) = value(*v) {
            num += w * x;
            den += w;
        }
    }
    (den > 0.0).then(|| (num / den).max(0.0))
}

fn verdicts(vs: &[FieldVerdict; 5]) -> FieldVerdicts {
    let mut f = FieldVerdicts::uniform(FieldVerdict::Absent);
    let kinds = [
        FieldKind::Title,
        FieldKind::Identifier,
        FieldKind::Authors,
        FieldKind::Year,
        FieldKind::Venue,
    ];
    for (k, v) in kinds.iter().zip(vs) {
        f.set(*k, *v);
    }
    f
}

fn c7_scoring() -> Outcome {
    use FieldVerdict::*;
    let t = Instant::now();
    let ex = [
        (authenticity_score(&verdicts(&[Match; 5])).unwrap(), 1.0),
        (
            authenticity_score(&verdicts(&[Match, Absent, Abbrev, Match, Contradiction])).unwrap(),
            0.4 / 0.75,
        ),
        (authenticity_score(&verdicts(&[Contradiction; 5])).unwrap(), 0.0),
    ];
    let mut ok = ex.iter().all(|(g, w)| within(*g, *w, 1e-9));
    let ladder = [Contradiction, Unconfirmed, Contains, Abbrev, Match];
    let all = FieldVerdict::ALL;
    let (mut combos, mut checks) = (0usize, 0usize);
    for i in 0..6usize.pow(5) {
        let vs: [FieldVerdict; 5] = std::array::from_fn(|f| all[(i / 6usize.pow(f as u32)) % 6]);
        combos += 1;
        let lib = authenticity_score(&verdicts(&vs)).ok();
        let hand = hand_score(&vs);
        ok &= match (lib, hand) {
            (Some(a), Some(b)) => within(a, b, 1e-12),
            (None, None) => true,
            _ => false,
        };
        let Some(base) = lib else { continue };
        for f in 0..5 {
            if let Some(pos) = ladder.iter().position(|v| *v == vs[f]) {
                if pos + 1 < ladder.len() {
                    let mut up = vs;
                    up[f] = ladder[pos + 1];
                    ok &= authenticity_score(&verdicts(&up)).unwrap() >= base - 1e-15;
                    checks += 1;
                }
            }
        }
    }
    let el = t.elapsed();
    outcome(
        ok && combos == 7776 && el < Duration::from_secs(10),
        format!(
            "examples {:.10}/{:.10}/{:.10}; {combos} combinations, {checks} upgrades in {el:?}",
            ex[0].0, ex[1].0, ex[2].0
        ),
    )
}

fn sigma(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn grid() -> Vec<(f64, f64)> {
    let ps: Vec<f64> = published::dense_models()
        .iter()
        .map(|m| m.params.unwrap().log10())
        .collect();
    let ss: Vec<f64> = published::topics()
        .iter()
        .map(|t| (t.works_count as f64).log10())
        .collect();
    ps.iter().flat_map(|p| ss.iter().map(move |s| (*p, *s))).collect()
}

/// Mean of `clamp(mu + sd·Z, 0, 1)`.
fn clamped_mean(mu: f64, sd: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    let (a, b) = (-mu / sd, (1.0 - mu) / sd);
    mu * (n.cdf(b) - n.cdf(a)) + sd * (n.pdf(a) - n.pdf(b)) + (1.0 - n.cdf(b))
}

fn c8_sigmoid_recovery() -> Outcome {
    let (a, b, g) = published::SIGMOID;
    let g384 = grid();
    let clean: Vec<(f64, f64, f64)> = g384.iter().map(|(p, s)| (*p, *s, sigma(a * p + b * s + g))).collect();
    let f = fit_sigmoid(&clean).unwrap();
    let exact = g384.len() == 384
        && within(f.alpha, a, 1e-6)
        && within(f.beta, b, 1e-6)
        && within(f.gamma, g, 1e-6)
        && within(f.r2, 1.0, 1e-9);
    // Parameters the fit converges to when the response is the clamped mean; diagnostic only.
    let pseudo_cells: Vec<(f64, f64, f64)> = clean.iter().map(|(p, s, q)| (*p, *s, clamped_mean(*q, 0.15))).collect();
    let pt = fit_sigmoid(&pseudo_cells).unwrap();
    let (mut joint, mut each, mut joint_pseudo) = (0, [0; 3], 0);
    for trial in 0..100 {
        let mut rng = substream(8_000, trial);
        let cells: Vec<(f64, f64, f64)> = clean
            .iter()
            .map(|(p, s, q)| (*p, *s, (q + 0.15 * standard_normal(&mut rng)).clamp(0.0, 1.0)))
            .collect();
        let f = fit_sigmoid(&cells).unwrap();
        let est = [f.alpha, f.beta, f.gamma];
        let se = [f.se_alpha, f.se_beta, f.se_gamma];
        let hits: Vec<bool> = [a, b, g]
            .iter()
            .zip(est.iter().zip(&se))
            .map(|(t, (e, s))| (e - t).abs() <= 2.0 * s)
            .collect();
        let pseudo = [pt.alpha, pt.beta, pt.gamma]
            .iter()
            .zip(est.iter().zip(&se))
            .all(|(t, (e, s))| (e - t).abs() <= 2.0 * s);
        for (c, h) in each.iter_mut().zip(&hits) {
            *c += *h as usize;
        }
        joint += hits.iter().all(|h| *h) as usize;
        joint_pseudo += pseudo as usize;
    }
    outcome(
        exact && joint >= 90,
        format!(
            "noise-free ({:.8}, {:.8}, {:.8}) r2={:.10}; noisy: all three within 2 SE of the generating values in {joint}/100 \
             (alpha {}, beta {}, gamma {}); within 2 SE of the clamped-mean fit ({:.3}, {:.3}, {:.3}) in {joint_pseudo}/100",
            f.alpha, f.beta, f.gamma, f.r2, each[0], each[1], each[2], pt.alpha, pt.beta, pt.gamma
        ),
    )
}

fn c9_theory() -> Outcome {
    let t = Instant::now();
    let m = 100_000u64;
    let e = TheoryExponents {
        c0: 3.0,
        ..TheoryExponents::default()
    };
    let cal = e.calibrated(m);
    let (mut ok, mut cells, mut worst) = (true, 0, 0.0f64);
    for i in 0..5 {
        for j in 0..5 {
            let p = 10f64.powf(i as f64 * 0.8);
            let s = 10f64.powf(j as f64 * 0.6);
            let closed = recall_fraction(p, s, &cal).unwrap();
            if closed >= 1.0 || closed <= 1.0 / m as f64 {
                continue;
            }
            let sim = simulate_recall(&SimConfig { m, p, s, exponents: e }).unwrap();
            worst = worst.max((sim.q - closed).abs() * m as f64);
            ok &= (sim.q - closed).abs() <= 1.0 / m as f64 + 1e-15;
            cells += 1;
        }
    }
    ok &= cells >= 15;
    let mut parts = vec![format!("{cells} grid cells, worst |diff|·M = {worst:.3}")];
    for (az, bs, ge, d) in [(1.23, 1.0, 1.0, 1.0), (1.23, 1.0, 0.4, 0.7), (2.0, 0.5, 1.0, 1.0)] {
        let e = TheoryExponents {
            alpha_z: az,
            beta_s: bs,
            gamma_e: ge,
            delta: d,
            ..TheoryExponents::default()
        };
        let (sp, ss) = simulator_slopes(&e, 1_000_000, 100.0).unwrap();
        let (wp, ws) = (ge / (2.0 * az * bs), d / az);
        ok &= (sp / wp - 1.0).abs() < 0.05 && (ss / ws - 1.0).abs() < 0.05;
        parts.push(format!("({az},{bs},{ge},{d}): P {sp:.4}/{wp:.4} S {ss:.4}/{ws:.4}"));
    }
    let el = t.elapsed();
    outcome(
        ok && el < Duration::from_secs(30),
        format!("{} in {el:?}", parts.join("; ")),
    )
}

fn c10_interference() -> Outcome {
    let t = Instant::now();
    let ns = [100usize, 1000, 10000];
    let x: Vec<f64> = ns.iter().map(|n| (*n as f64).log10()).collect();
    let y: Vec<f64> = ns
        .iter()
        .map(|n| interference_floor(*n, 30, 4, 5).unwrap().log10())
        .collect();
    let (slope, _, _) = hand_ols(&x, &y);
    let el = t.elapsed();
    outcome(
        within(slope, -0.5, 0.05) && el < Duration::from_secs(30),
        format!("log-slope {slope:.4} in {el:?}"),
    )
}

fn pareto(n: usize, alpha: f64, x_min: f64, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, 0);
    (0..n)
        .map(|_| x_min * (1.0 - rng.random::<f64>()).powf(-1.0 / (alpha - 1.0)))
        .collect()
}

fn c11_zipf() -> Outcome {
    let mut rng = substream(11_000, 0);
    let counts: Vec<f64> = (1..=10_000)
        .map(|k| 1e6 * (k as f64).powf(-1.23) * (0.1 * standard_normal(&mut rng)).exp())
        .collect();
    let ols = fit_zipf_ols(&RankedFrequencies::from_counts(&counts).unwrap())
        .unwrap()
        .alpha;
    let mle = fit_zipf_mle(&pareto(10_000, 1.23, 1.0, 11_001), 1.0).unwrap();
    let e = std::f64::consts::E;
    let unit = fit_zipf_mle(&[3.0 * e; 7], 3.0).unwrap() == 2.0
        && fit_zipf_mle(&[4.0], 2.0).unwrap() == 1.0 + 1.0 / 2f64.ln()
        && fit_zipf_mle(&[1.0, 1.0], 1.0).is_err();
    let mut covered = 0;
    for t in 0..200 {
        let s = pareto(500, 1.23, 1.0, 12_000 + t);
        if bootstrap_mle_ci(&s, 1.0, 1000, t).unwrap().contains(1.23) {
            covered += 1;
        }
    }
    outcome(
        within(ols, 1.23, 0.05) && within(mle, 1.23, 0.05) && unit && covered >= 186,
        format!("OLS {ols:.4}, MLE {mle:.4}, closed-form cases {unit}, bootstrap coverage {covered}/200"),
    )
}

fn c12_citation_gradient() -> Outcome {
    let mut samples = Vec::new();
    let mut params = BTreeMap::new();
    let mut truth = BTreeMap::new();
    for i in 0..10 {
        let p = 10f64.powf(i as f64 * 3.0 / 9.0);
        let median = 2000.0 * p.powf(-0.35);
        let mut rng = substream(12_000, i);
        let name = format!("model-{i}");
        params.insert(name.clone(), p);
        truth.insert(name.clone(), median);
        samples.push(CitationSample {
            model: name,
            matched: (0..200)
                .map(|j| {
                    (
                        j.to_string(),
                        (median.ln() + standard_normal(&mut rng)).exp().round() as u64,
                    )
                })
                .collect(),
            n_unmatched: 7,
            ..Default::default()
        });
    }
    params.insert("thin".into(), 50.0);
    samples.push(CitationSample {
        model: "thin".into(),
        matched: (0..49).map(|j| (j.to_string(), 100)).collect(),
        ..Default::default()
    });
    samples.push(CitationSample {
        model: "undisclosed".into(),
        matched: (0..200).map(|j| (j.to_string(), 100)).collect(),
        ..Default::default()
    });
    let g = citation_gradient(&samples, &params, 50, 2000, 7).unwrap();
    let excluded: Vec<&str> = g.excluded.iter().map(|e| e.0.as_str()).collect();
    let cis_ok = g
        .models
        .iter()
        .all(|m| m.ci.lower <= m.median && m.median <= m.ci.upper && m.ci.lower > 0.0);
    let covered = g.models.iter().filter(|m| m.ci.contains(truth[&m.model])).count();
    let ok = g.models.len() == 10
        && excluded == ["thin", "undisclosed"]
        && g.models.iter().all(|m| m.n_matched == 200)
        && cis_ok
        && within(g.slope(), -0.35, 0.05);
    outcome(
        ok,
        format!(
            "slope {:.4}, {} models, excluded {excluded:?}, true median inside CI for {covered}/10",
            g.slope(),
            g.models.len()
        ),
    )
}

fn bundle_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn c13_determinism() -> Outcome {
    let t = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let world = tmp.path().join("world");
    confab::demo::generate(&world, 7).unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_confab"))
            .args([
                "--config",
                world.join("config.json").to_str().unwrap(),
                "--offline",
                "--out",
                out.to_str().unwrap(),
                "run",
            ])
            .output()
            .unwrap();
        (
            o.status.code(),
            String::from_utf8_lossy(&o.stderr).into_owned(),
            bundle_files(&out),
        )
    };
    let (c1, e1, a) = run("a");
    let (c2, e2, b) = run("b");
    let el = t.elapsed();
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    outcome(
        c1 == Some(0)
            && c2 == Some(0)
            && a.len() >= 20
            && a.keys().eq(b.keys())
            && differing.is_empty()
            && el < Duration::from_secs(300),
        format!(
            "{} files, differing {differing:?}, generate + 2 runs in {el:?}{}{}",
            a.len(),
            e1.trim(),
            e2.trim()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 13] = [
        ("1 cross-family log-linear R2", c1_cross_family),
        ("2 within-family slopes", c2_within_family),
        ("3 reference-slope table", c3_reference_slopes),
        ("4 agreement statistics", c4_agreement),
        ("5 Spearman p-value", c5_spearman_p),
        ("6 extrapolation order", c6_extrapolation),
        ("7 scoring suite", c7_scoring),
        ("8 sigmoid recovery", c8_sigmoid_recovery),
        ("9 theory oracle equivalence", c9_theory),
        ("10 interference floor", c10_interference),
        ("11 Zipf estimators", c11_zipf),
        ("12 citation gradient recovery", c12_citation_gradient),
        ("13 end-to-end determinism", c13_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let o = f();
        failed += !o.pass as usize;
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

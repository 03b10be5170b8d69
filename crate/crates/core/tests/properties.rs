use std::collections::BTreeMap;

use confab_core::citeparse::{content_word_overlap, normalize_title, parse_apa, Stopwords};
use confab_core::citetail::{citation_gradient, CitationSample};
use confab_core::fitlab::SigmoidFit;
use confab_core::fitlab::{bootstrap_median_ci, cohen_kappa, fit_ols, spearman, ConfusionMatrix2x2};
use confab_core::refdata::{build_observations, dedup_by_title, CellAccounting, ReferenceKey, ScoredReference};
use confab_core::theory::{classify_regime, quality_from_q, required_params_log10, QualityLink};
use confab_core::verify::{
    authenticity_score, classify_status, quality, FieldKind, FieldVerdict, FieldVerdicts, RelevanceLabel,
};
use confab_core::zipf::{fit_zipf_mle, fit_zipf_ols, RankedFrequencies};
use proptest::prelude::*;

fn verdict() -> impl Strategy<Value = FieldVerdict> {
    prop::sample::select(FieldVerdict::ALL.to_vec())
}

fn verdicts() -> impl Strategy<Value = FieldVerdicts> {
    (verdict(), verdict(), verdict(), verdict(), verdict()).prop_map(|(t, i, a, y, v)| FieldVerdicts {
        title: t,
        identifier: i,
        authors: a,
        year: y,
        venue: v,
    })
}

fn label() -> impl Strategy<Value = RelevanceLabel> {
    prop::sample::select(vec![RelevanceLabel::No, RelevanceLabel::Partial, RelevanceLabel::Yes])
}

const KINDS: [FieldKind; 5] = [
    FieldKind::Title,
    FieldKind::Identifier,
    FieldKind::Authors,
    FieldKind::Year,
    FieldKind::Venue,
];

fn upgrade(v: FieldVerdict) -> Option<FieldVerdict> {
    use FieldVerdict::*;
    match v {
        Contradiction => Some(Unconfirmed),
        Unconfirmed => Some(Contains),
        Contains => Some(Abbrev),
        Abbrev => Some(Match),
        Match | Absent => None,
    }
}

proptest! {
    #[test]
    fn normalize_title_idempotent_and_shrinking(s in "\\PC{0,60}") {
        let once = normalize_title(&s);
        prop_assert_eq!(normalize_title(&once), once.clone());
        prop_assert!(once.chars().count() <= s.chars().count() * 2);
        prop_assert!(once.len() <= normalize_title(&s).len());
    }

    #[test]
    fn parse_never_fabricates(
        authors in "[A-Z][a-z]{2,8}, [A-Z]\\.( & [A-Z][a-z]{2,8}, [A-Z]\\.)?",
        year in 1950i32..2030,
        title in "[A-Z][a-z]{3,9}( [a-z]{2,9}){1,6}",
        venue in "[A-Z][a-z]{3,9}( [A-Z][a-z]{2,9}){0,3}",
        vol in 1u32..99,
    ) {
        let raw = format!("{authors} ({year}). {title}. {venue}, {vol}(2), 1-10.");
        let p = parse_apa(&raw).unwrap();
        for a in &p.authors {
            prop_assert!(raw.contains(a.trim()));
        }
        prop_assert!(raw.contains(p.title.trim()));
        if let Some(v) = &p.venue {
            prop_assert!(raw.contains(v.trim()));
        }
        prop_assert_eq!(p.year, Some(year));
    }

    #[test]
    fn overlap_self_is_one(s in "[a-z]{4,10}( [a-z]{4,10}){0,5}") {
        let sw = Stopwords::english();
        let o = content_word_overlap(&s, &s, &sw);
        prop_assert!(o == 1.0 || o == 0.0);
        prop_assert!((0.0..=1.0).contains(&content_word_overlap(&s, "river delta", &sw)));
    }

    #[test]
    fn score_monotone_under_single_upgrade(v in verdicts(), which in 0usize..5) {
        let kind = KINDS[which];
        if let Some(up) = upgrade(v.get(kind)) {
            let mut w = v;
            w.set(kind, up);
            prop_assert!(authenticity_score(&w).unwrap() >= authenticity_score(&v).unwrap());
        }
    }

    #[test]
    fn score_in_unit_interval(v in verdicts()) {
        if let Ok(s) = authenticity_score(&v) {
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn verified_statuses_need_match(v in verdicts()) {
        prop_assert!(!classify_status(&v, false).is_verified());
    }

    #[test]
    fn quality_bounds(a in 0.0f64..=1.0, l in label(), w in 0.0f64..=1.0) {
        let q = quality(a, l, w);
        prop_assert!((0.0..=1.0).contains(&q));
        if l == RelevanceLabel::No {
            prop_assert_eq!(q, 0.0);
        }
    }

    #[test]
    fn dedup_idempotent(titles in prop::collection::vec("[A-Ca-c ]{1,6}", 0..20)) {
        let once = dedup_by_title(titles.clone(), |t| t.as_str());
        let twice = dedup_by_title(once.kept.clone(), |t| t.as_str());
        prop_assert_eq!(&twice.kept, &once.kept);
        prop_assert_eq!(twice.removed, 0);
        prop_assert_eq!(once.kept.len() + once.removed, titles.len());
        // survivors are untouched input records, in input order
        let mut it = titles.iter();
        for k in &once.kept {
            prop_assert!(it.any(|t| t == k));
        }
    }

    #[test]
    fn observations_order_invariant_and_monotone(
        refs in prop::collection::vec((0.0f64..=1.0, label()), 1..12),
        seed in any::<u64>(),
        w1 in 0.0f64..=1.0,
        w2 in 0.0f64..=1.0,
    ) {
        let cells = vec![CellAccounting {
            model: "m".into(),
            topic: "t".into(),
            n_requested: 10,
            n_produced: refs.len(),
            flag: None,
        }];
        let scored: Vec<ScoredReference> = refs
            .iter()
            .enumerate()
            .map(|(i, (a, l))| ScoredReference {
                key: ReferenceKey::new("m", "t", i),
                authenticity: *a,
                relevance: Some(*l),
            })
            .collect();
        let mut shuffled = scored.clone();
        let n = shuffled.len();
        for i in 0..n {
            let j = ((seed >> (i % 60)) as usize + i * 31) % n;
            shuffled.swap(i, j);
        }
        let a = build_observations(&cells, &scored, w1).unwrap();
        let b = build_observations(&cells, &shuffled, w1).unwrap();
        prop_assert_eq!(a.cells[0].quality.to_bits(), b.cells[0].quality.to_bits());
        let (lo, hi) = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
        let qlo = build_observations(&cells, &scored, lo).unwrap().cells[0].quality;
        let qhi = build_observations(&cells, &scored, hi).unwrap().cells[0].quality;
        prop_assert!((0.0..=1.0).contains(&qlo) && qlo <= qhi + 1e-15);
    }

    #[test]
    fn ols_residuals_orthogonal_and_nested_r2(
        pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), 6..40)
    ) {
        let x1: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let x2: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.2 + 0.3 * p.0).collect();
        let (Ok(full), Ok(red)) = (fit_ols(&[&x1, &x2], &y), fit_ols(&[&x1], &y)) else {
            return Ok(());
        };
        for col in [&x1, &x2] {
            let dot: f64 = (0..y.len()).map(|i| (y[i] - full.predict(&[x1[i], x2[i]])) * col[i]).sum();
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(dot.abs() < 1e-8 * norm.max(1.0));
        }
        prop_assert!(full.r2 >= red.r2 - 1e-12);
        prop_assert!(full.rss >= 0.0);
    }

    #[test]
    fn spearman_monotone_invariance(v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 4..25)) {
        let x: Vec<f64> = v.iter().map(|p| p.0).collect();
        let y: Vec<f64> = v.iter().map(|p| p.1).collect();
        if let Ok(s) = spearman(&x, &y) {
            let tx: Vec<f64> = x.iter().map(|a| a.exp()).collect();
            let ty: Vec<f64> = y.iter().map(|b| b * b * b + 2.0 * b).collect();
            let t = spearman(&tx, &ty).unwrap();
            prop_assert!((s.rho - t.rho).abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_transpose_symmetric(tp in 0u64..50, fp in 0u64..50, fn_ in 0u64..50, tn in 0u64..50) {
        let cm = ConfusionMatrix2x2 { tp, fp, fn_, tn };
        match (cohen_kappa(&cm), cohen_kappa(&cm.transpose())) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn bootstrap_reproducible(v in prop::collection::vec(0.0f64..1e4, 2..30), seed in any::<u64>()) {
        let a = bootstrap_median_ci(&v, 200, seed).unwrap();
        let b = bootstrap_median_ci(&v, 200, seed).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.lower <= a.upper);
    }

    #[test]
    fn zipf_scale_invariance(
        mut f in prop::collection::vec(1.0f64..1e6, 3..60),
        c in 1e-3f64..1e3,
    ) {
        f.sort_by(|a, b| b.total_cmp(a));
        let rf = RankedFrequencies::new(f.clone()).unwrap();
        let scaled = RankedFrequencies::new(f.iter().map(|v| v * c).collect()).unwrap();
        if let (Ok(a), Ok(b)) = (fit_zipf_ols(&rf), fit_zipf_ols(&scaled)) {
            prop_assert!((a.alpha - b.alpha).abs() < 1e-8);
        }
        let xmin = f[f.len() - 1];
        if let (Ok(a), Ok(b)) = (fit_zipf_mle(&f, xmin), fit_zipf_mle(scaled.frequencies(), xmin * c)) {
            prop_assert!((a - b).abs() < 1e-8 * a.abs().max(1.0));
        }
    }

    #[test]
    fn mle_order_invariant(mut v in prop::collection::vec(1.0f64..100.0, 2..40)) {
        let a = fit_zipf_mle(&v, 1.0);
        v.reverse();
        let b = fit_zipf_mle(&v, 1.0);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12 * a),
            (a, b) => prop_assert_eq!(a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn link_and_regime_monotone(q1 in 1e-6f64..1e3, q2 in 1e-6f64..1e3, z1 in -10.0f64..10.0, z2 in -10.0f64..10.0) {
        let link = QualityLink { a: 1.7, b: -0.4 };
        if q1 < q2 {
            prop_assert!(quality_from_q(q1, &link).unwrap() <= quality_from_q(q2, &link).unwrap());
        }
        if z1 <= z2 {
            prop_assert!(classify_regime(z1) <= classify_regime(z2));
        }
    }

    #[test]
    fn required_params_inverts_model(q in 0.01f64..0.99, s in 1.0f64..1e7) {
        let fit = SigmoidFit::from_params(1.48, 0.46, -5.19);
        let lp = required_params_log10(q, s, &fit).unwrap();
        prop_assert!((fit.predict(lp, s.log10()) - q).abs() < 1e-9);
    }

    #[test]
    fn raising_min_n_never_adds_models(sizes in prop::collection::vec(1usize..80, 3..8), lo in 1usize..40, extra in 0usize..40) {
        let params: BTreeMap<String, f64> = (0..sizes.len()).map(|i| (format!("m{i}"), 10f64.powi(i as i32))).collect();
        let samples: Vec<CitationSample> = sizes
            .iter()
            .enumerate()
            .map(|(i, n)| CitationSample {
                model: format!("m{i}"),
                matched: (0..*n).map(|j| (j.to_string(), 5 + (j * 7 % 40) as u64)).collect(),
                ..Default::default()
            })
            .collect();
        let qualifying = |min_n: usize| citation_gradient(&samples, &params, min_n, 50, 3).map(|g| g.models.len()).unwrap_or(0);
        prop_assert!(qualifying(lo + extra) <= qualifying(lo));
    }
}

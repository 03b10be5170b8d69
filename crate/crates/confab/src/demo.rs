//! Deterministic synthetic corpus with a matching fixture cache.
//!
//! Each topic owns a catalog of works. Model outputs mix catalog works
//! (sometimes with corrupted fields) and fabricated references; the share of
//! real works follows a logistic in log size and log works count, and larger
//! models reach further down the citation ranking. Search responses are
//! recorded for every title the pipeline will query.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use confab_core::citeparse::{content_word_overlap, Stopwords};
use confab_core::citetail::SEARCH_DEPTH;
use confab_core::refdata::{Architecture, CellFlag, Dataset, ModelSpec, RawGeneration, RelevanceRecord, TopicSpec};
use confab_core::rng::{standard_normal, substream, StreamRng};
use confab_core::verify::RelevanceLabel;
use rand::Rng;
use serde_json::json;

use crate::dataset::ingest;
use crate::error::{AppError, AppResult};
use crate::openalex::{write_atomic, FixtureCache, OpenAlexClient};

const CATALOG_SIZE: usize = 80;

struct TopicDef {
    name: &'static str,
    group: &'static str,
    level: u8,
    works: u64,
    /// Whether the count ships in the dataset or must be looked up.
    in_dataset: bool,
    vocab: &'static [&'static str],
}

const AGRI: &[&str] = &[
    "maize",
    "soil",
    "fertility",
    "seed",
    "yield",
    "fertilizer",
    "smallholder",
    "drought",
    "harvest",
    "variety",
    "adoption",
    "productivity",
    "extension",
    "cropping",
    "tillage",
];
const WATER: &[&str] = &[
    "groundwater",
    "aquifer",
    "irrigation",
    "rainwater",
    "catchment",
    "recharge",
    "pumping",
    "salinity",
    "wells",
    "basin",
    "allocation",
    "scarcity",
    "storage",
    "runoff",
    "canal",
];
const NUTRITION: &[&str] = &[
    "stunting",
    "micronutrient",
    "iron",
    "anaemia",
    "diet",
    "fortification",
    "breastfeeding",
    "wasting",
    "zinc",
    "supplementation",
    "growth",
    "infant",
    "meals",
    "vitamin",
    "feeding",
];

const TOPICS: [TopicDef; 12] = [
    TopicDef {
        name: "Agriculture",
        group: "Agriculture",
        level: 1,
        works: 2_400_000,
        in_dataset: true,
        vocab: AGRI,
    },
    TopicDef {
        name: "Crop yield",
        group: "Agriculture",
        level: 2,
        works: 85_000,
        in_dataset: false,
        vocab: AGRI,
    },
    TopicDef {
        name: "Drought-tolerant maize",
        group: "Agriculture",
        level: 3,
        works: 3_200,
        in_dataset: true,
        vocab: AGRI,
    },
    TopicDef {
        name: "Maize seed systems in semi-arid regions",
        group: "Agriculture",
        level: 4,
        works: 60,
        in_dataset: true,
        vocab: AGRI,
    },
    TopicDef {
        name: "Water",
        group: "Water",
        level: 1,
        works: 3_100_000,
        in_dataset: true,
        vocab: WATER,
    },
    TopicDef {
        name: "Groundwater management",
        group: "Water",
        level: 2,
        works: 41_000,
        in_dataset: false,
        vocab: WATER,
    },
    TopicDef {
        name: "Rainwater harvesting",
        group: "Water",
        level: 3,
        works: 6_800,
        in_dataset: true,
        vocab: WATER,
    },
    TopicDef {
        name: "Solar-powered irrigation for smallholders",
        group: "Water",
        level: 4,
        works: 140,
        in_dataset: true,
        vocab: WATER,
    },
    TopicDef {
        name: "Nutrition",
        group: "Nutrition",
        level: 1,
        works: 1_500_000,
        in_dataset: true,
        vocab: NUTRITION,
    },
    TopicDef {
        name: "Child stunting",
        group: "Nutrition",
        level: 2,
        works: 22_000,
        in_dataset: false,
        vocab: NUTRITION,
    },
    TopicDef {
        name: "Micronutrient supplementation",
        group: "Nutrition",
        level: 3,
        works: 9_400,
        in_dataset: true,
        vocab: NUTRITION,
    },
    TopicDef {
        name: "Iron fortification of school meals",
        group: "Nutrition",
        level: 4,
        works: 45,
        in_dataset: true,
        vocab: NUTRITION,
    },
];

const PLACES: &[&str] = &[
    "Malawi",
    "Kenya",
    "Ethiopia",
    "Ghana",
    "Bangladesh",
    "Nepal",
    "Peru",
    "Bolivia",
    "Tanzania",
    "Zambia",
    "Uganda",
    "Senegal",
    "Cambodia",
    "Vietnam",
];
const METHODS: &[&str] = &[
    "a panel study",
    "a randomized evaluation",
    "evidence from household surveys",
    "a spatial analysis",
    "a cohort study",
    "a systematic review",
    "a field experiment",
    "insights from district records",
];
const FAB_WORDS: &[&str] = &[
    "paradigm",
    "resilience",
    "synergy",
    "nexus",
    "framework",
    "transformative",
    "holistic",
    "pathways",
    "innovations",
    "lens",
    "dynamics",
    "reimagining",
    "trajectories",
    "convergence",
    "horizons",
    "catalysing",
];
const GIVEN: &[&str] = &[
    "Amina",
    "Kwame",
    "Li",
    "Maria",
    "Rahul",
    "Sofia",
    "Tomas",
    "Yuki",
    "Chidi",
    "Elena",
    "Hassan",
    "Ingrid",
    "Jorge",
    "Mei",
    "Nadia",
    "Oluwaseun",
    "Priya",
    "Samuel",
];
const MIDDLE: &[&str] = &["A.", "B.", "K.", "M.", "R.", "T."];
const SURNAMES: &[&str] = &[
    "Otieno",
    "Mensah",
    "Chen",
    "Garcia",
    "Sharma",
    "Rossi",
    "Novak",
    "Tanaka",
    "Okafor",
    "Petrova",
    "Haddad",
    "Lindqvist",
    "Ramirez",
    "Wong",
    "Karimi",
    "Adeyemi",
    "Iyer",
    "Banda",
    "Moyo",
    "Silva",
];
const VENUES: &[&str] = &[
    "World Development",
    "Food Policy",
    "Agricultural Water Management",
    "Journal of Development Economics",
    "Global Food Security",
    "Water Resources Research",
    "Public Health Nutrition",
    "Maternal and Child Nutrition",
    "Field Crops Research",
    "Journal of Hydrology",
];
const FAB_VENUES: &[&str] = &[
    "International Journal of Sustainable Futures",
    "Global Review of Development Praxis",
    "Journal of Integrated Systems Thinking",
];

/// Model name and size in billions; `None` for an undisclosed size.
const MODELS: [(&str, Option<f64>); 9] = [
    ("demo-1b", Some(1.0)),
    ("demo-3b", Some(3.0)),
    ("demo-8b", Some(8.0)),
    ("demo-14b", Some(14.0)),
    ("demo-32b", Some(32.0)),
    ("demo-70b", Some(70.0)),
    ("demo-180b", Some(180.0)),
    ("demo-405b", Some(405.0)),
    ("demo-closed", None),
];

#[derive(Debug, Clone)]
struct Work {
    id: String,
    title: String,
    /// (given, middle initial, surname)
    authors: Vec<(String, String, String)>,
    year: i32,
    venue: String,
    doi: String,
    cited_by_count: u64,
}

fn pick<'a>(rng: &mut StreamRng, xs: &'a [&'a str]) -> &'a str {
    xs[rng.random_range(0..xs.len())]
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

fn random_authors(rng: &mut StreamRng) -> Vec<(String, String, String)> {
    let n = rng.random_range(1..=3);
    let mut used = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < n {
        let s = pick(rng, SURNAMES);
        if used.insert(s) {
            out.push((
                pick(rng, GIVEN).to_string(),
                pick(rng, MIDDLE).to_string(),
                s.to_string(),
            ));
        }
    }
    out
}

fn catalog(t: usize, def: &TopicDef, seed: u64) -> Vec<Work> {
    let mut rng = substream(seed, 1000 + t as u64);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < CATALOG_SIZE {
        let a = pick(&mut rng, def.vocab);
        let b = pick(&mut rng, def.vocab);
        if a == b {
            continue;
        }
        let title = format!(
            "{} and {} in {}: {}",
            capitalize(a),
            b,
            pick(&mut rng, PLACES),
            pick(&mut rng, METHODS)
        );
        if !seen.insert(title.to_lowercase()) {
            continue;
        }
        let rank = out.len() + 1;
        let cites = 20_000.0 * (rank as f64).powf(-1.1) * (0.3 * standard_normal(&mut rng)).exp();
        out.push(Work {
            id: format!("https://openalex.org/W9{t:02}{rank:04}"),
            title,
            authors: random_authors(&mut rng),
            year: rng.random_range(1985..=2023),
            venue: pick(&mut rng, VENUES).to_string(),
            doi: format!("https://doi.org/10.5555/demo.{t}.{rank}"),
            cited_by_count: cites.round() as u64,
        });
    }
    out
}

fn apa_authors(authors: &[(String, String, String)]) -> String {
    let names: Vec<String> = authors
        .iter()
        .map(|(g, m, s)| format!("{s}, {}. {m}", g.chars().next().unwrap()))
        .collect();
    match names.len() {
        1 => names[0].clone(),
        n => format!("{}, & {}", names[..n - 1].join(", "), names[n - 1]),
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// APA line for a catalog work, possibly with one corrupted field.
fn real_line(w: &Work, corrupt: bool, rng: &mut StreamRng) -> String {
    let mut authors = w.authors.clone();
    let mut year = w.year;
    let mut title = w.title.clone();
    let mut venue = w.venue.clone();
    let mut doi = Some(w.doi.clone());
    if corrupt {
        match rng.random_range(0..5) {
            0 => year += rng.random_range(1..=3),
            1 => doi = None,
            2 => authors[0].2 = pick(rng, SURNAMES).to_string(),
            3 => {
                venue = format!(
                    "{venue}, {}({}), {}-{}",
                    rng.random_range(5..60),
                    rng.random_range(1..5),
                    100,
                    130
                )
            }
            _ => title = title.split(':').next().unwrap().to_string(),
        }
    }
    let mut s = format!("{} ({year}). {title}. *{venue}*.", apa_authors(&authors));
    if let Some(d) = doi {
        s.push(' ');
        s.push_str(&d);
    }
    s
}

fn fabricated_line(def: &TopicDef, rng: &mut StreamRng) -> String {
    let mut words: Vec<&str> = Vec::new();
    while words.len() < 4 {
        let w = pick(rng, FAB_WORDS);
        if !words.contains(&w) {
            words.push(w);
        }
    }
    let title = format!(
        "{} {} for {}: {} {} and {}",
        capitalize(words[0]),
        words[1],
        pick(rng, def.vocab),
        capitalize(words[2]),
        words[3],
        pick(rng, FAB_WORDS)
    );
    let mut s = format!(
        "{} ({}). {title}. *{}*.",
        apa_authors(&random_authors(rng)),
        rng.random_range(2005..=2024),
        pick(rng, FAB_VENUES)
    );
    if rng.random::<f64>() < 0.4 {
        s.push_str(&format!(
            " https://doi.org/10.5555/fab.{}",
            rng.random_range(1000..9999)
        ));
    }
    s
}

fn work_json(w: &Work) -> serde_json::Value {
    json!({
        "id": w.id,
        "display_name": w.title,
        "publication_year": w.year,
        "doi": w.doi,
        "cited_by_count": w.cited_by_count,
        "authorships": w.authors.iter().map(|(g, m, s)| json!({"author": {"display_name": format!("{g} {m} {s}")}})).collect::<Vec<_>>(),
        "primary_location": {"source": {"display_name": w.venue}},
    })
}

/// Paths written by [`generate`].
#[derive(Debug, Clone)]
pub struct DemoFiles {
    pub dataset: PathBuf,
    pub cache: PathBuf,
    pub config: PathBuf,
    pub n_fixtures: usize,
}

/// Writes `dataset.json`, `cache/` and `config.json` under `dir`.
pub fn generate(dir: &Path, seed: u64) -> AppResult<DemoFiles> {
    let catalogs: Vec<Vec<Work>> = TOPICS.iter().enumerate().map(|(i, d)| catalog(i, d, seed)).collect();
    let mut generations = Vec::new();
    let mut labels = Vec::new();
    for (mi, (name, params)) in MODELS.iter().enumerate() {
        let size = params.unwrap_or(200.0);
        for (ti, def) in TOPICS.iter().enumerate() {
            let mut rng = substream(seed, (mi * 100 + ti) as u64);
            if mi == 0 && ti == 3 {
                generations.push(RawGeneration {
                    model: name.to_string(),
                    topic: def.name.to_string(),
                    raw_text: String::new(),
                    flag: Some(CellFlag::Refusal),
                });
                continue;
            }
            let z = 1.48 * size.log10() + 0.46 * (def.works as f64).log10() - 5.19 + 0.3 * standard_normal(&mut rng);
            let p_real = sigmoid(z).clamp(0.02, 0.97);
            let depth = (5.0 + 70.0 * size.log10() / 405f64.log10()).round() as usize;
            let corrupt_p = (0.45 - 0.08 * size.log10()).max(0.05);
            let produced = if rng.random::<f64>() < 0.1 {
                rng.random_range(8..10)
            } else {
                10
            };
            let mut lines: Vec<String> = Vec::new();
            for _ in 0..produced {
                let roll = rng.random::<f64>();
                let real = roll < p_real;
                let line = if rng.random::<f64>() < 0.02 {
                    format!(
                        "({}). {}.",
                        rng.random_range(2000..2024),
                        capitalize(pick(&mut rng, def.vocab))
                    )
                } else if rng.random::<f64>() < 0.03 && !lines.is_empty() {
                    lines.last().unwrap().clone()
                } else if real {
                    let w = &catalogs[ti][rng.random_range(0..depth.min(CATALOG_SIZE))];
                    let corrupt = rng.random::<f64>() < corrupt_p;
                    real_line(w, corrupt, &mut rng)
                } else {
                    fabricated_line(def, &mut rng)
                };
                let u = rng.random::<f64>();
                let label = match (real, u) {
                    (true, u) if u < 0.7 => RelevanceLabel::Yes,
                    (true, u) if u < 0.9 => RelevanceLabel::Partial,
                    (false, u) if u < 0.5 => RelevanceLabel::Yes,
                    (false, u) if u < 0.8 => RelevanceLabel::Partial,
                    _ => RelevanceLabel::No,
                };
                labels.push(RelevanceRecord {
                    model: name.to_string(),
                    topic: def.name.to_string(),
                    reference_index: lines.len() + 1,
                    label,
                });
                lines.push(line);
            }
            let body: Vec<String> = lines
                .iter()
                .enumerate()
                .map(|(i, l)| format!("{}. {l}", i + 1))
                .collect();
            generations.push(RawGeneration {
                model: name.to_string(),
                topic: def.name.to_string(),
                raw_text: format!(
                    "Here are {} scholarly references on {}:\n\n{}\n\nLet me know if you need more detail.",
                    produced,
                    def.name.to_lowercase(),
                    body.join("\n")
                ),
                flag: None,
            });
        }
    }
    let ds = Dataset {
        references_requested: 10,
        models: MODELS
            .iter()
            .map(|(n, p)| ModelSpec {
                name: n.to_string(),
                family: if p.is_some() { "Demo" } else { "Closed" }.to_string(),
                params: *p,
                total_params: None,
                architecture: if p.is_some() {
                    Architecture::Dense
                } else {
                    Architecture::Unknown
                },
                fine_tune_of: None,
            })
            .collect(),
        topics: TOPICS
            .iter()
            .map(|d| TopicSpec {
                name: d.name.to_string(),
                group: d.group.to_string(),
                specificity_level: d.level,
                works_count: d.in_dataset.then_some(d.works),
            })
            .collect(),
        generations,
        relevance_labels: labels,
    };
    ds.validate()?;

    let cache_dir = dir.join("cache");
    let cache = FixtureCache::new(&cache_dir);
    let stop = Stopwords::english();
    let all_works: Vec<&Work> = catalogs.iter().flatten().collect();
    let mut titles = BTreeSet::new();
    for r in ingest(&ds).references {
        titles.insert(r.parsed.title);
    }
    let io = |p: &Path, e| AppError::io(p, e);
    for title in &titles {
        let mut scored: Vec<(f64, &Work)> = all_works
            .iter()
            .map(|w| (content_word_overlap(title, &w.title, &stop), *w))
            .filter(|(o, _)| *o > 0.0)
            .collect();
        scored.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then(b.1.cited_by_count.cmp(&a.1.cited_by_count))
                .then(a.1.id.cmp(&b.1.id))
        });
        let results: Vec<_> = scored.iter().take(SEARCH_DEPTH).map(|(_, w)| work_json(w)).collect();
        let body = json!({"meta": {"count": scored.len()}, "results": results}).to_string();
        let req = OpenAlexClient::works_search_request(title, SEARCH_DEPTH);
        cache
            .put(&req, &body, 0)
            .map_err(|e| io(&cache.path_for(&req.fingerprint()), e))?;
    }
    let mut n_fixtures = titles.len();
    for d in TOPICS.iter().filter(|d| !d.in_dataset) {
        let req = OpenAlexClient::works_count_request(d.name);
        let body = json!({"meta": {"count": d.works}, "results": []}).to_string();
        cache
            .put(&req, &body, 0)
            .map_err(|e| io(&cache.path_for(&req.fingerprint()), e))?;
        n_fixtures += 1;
    }

    let dataset = dir.join("dataset.json");
    let mut bytes = serde_json::to_vec_pretty(&ds).map_err(|e| AppError::data(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(&dataset, &bytes).map_err(|e| io(&dataset, e))?;
    let config = dir.join("config.json");
    let cfg = json!({
        "dataset": "dataset.json",
        "fixtures": "cache",
        "offline": true,
        "seed": seed,
        "min_matched": 20,
    });
    let mut bytes = serde_json::to_vec_pretty(&cfg).map_err(|e| AppError::data(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(&config, &bytes).map_err(|e| io(&config, e))?;
    Ok(DemoFiles {
        dataset,
        cache: cache_dir,
        config,
        n_fixtures,
    })
}

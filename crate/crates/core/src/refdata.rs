//! Catalog types, dataset validation, within-cell deduplication and the
//! aggregation of scored references into model×topic observation cells.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::citeparse::{normalize_title, ParsedReference};
use crate::error::{Error, Result};
use crate::verify::{relevance_value, RelevanceLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    Dense,
    DenseCot,
    Moe,
    MoeCot,
    Unknown,
}

/// Which parameter count stands in for P when a model is a mixture of experts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamAxis {
    #[default]
    Total,
    Active,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub family: String,
    /// Billions of (active) parameters; `None` when undisclosed.
    #[serde(default)]
    pub params: Option<f64>,
    /// Billions of total parameters for mixture-of-experts models.
    #[serde(default)]
    pub total_params: Option<f64>,
    pub architecture: Architecture,
    #[serde(default)]
    pub fine_tune_of: Option<String>,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.params {
            if !(p > 0.0) {
                return Err(Error::invalid(format!("model {}: params must be > 0", self.name)));
            }
        }
        if let (Some(p), Some(t)) = (self.params, self.total_params) {
            if t < p {
                return Err(Error::invalid(format!("model {}: total_params < params", self.name)));
            }
        }
        if self.architecture == Architecture::Dense && self.total_params.is_some() {
            return Err(Error::invalid(format!(
                "model {}: dense model with total_params",
                self.name
            )));
        }
        Ok(())
    }

    /// Parameter count (billions) used on the P axis of fits.
    pub fn fit_params(&self, axis: ParamAxis) -> Option<f64> {
        match axis {
            ParamAxis::Total => self.total_params.or(self.params),
            ParamAxis::Active => self.params,
        }
    }

    /// Dense, non-chain-of-thought, with a known size: the primary-fit population.
    pub fn is_primary_dense(&self) -> bool {
        self.architecture == Architecture::Dense && self.params.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSpec {
    pub name: String,
    pub group: String,
    pub specificity_level: u8,
    /// Scholarly work count for the topic phrase; looked up when absent.
    #[serde(default)]
    pub works_count: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellFlag {
    Refusal,
    ZeroOutput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGeneration {
    pub model: String,
    pub topic: String,
    #[serde(default)]
    pub raw_text: String,
    #[serde(default)]
    pub flag: Option<CellFlag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevanceRecord {
    pub model: String,
    pub topic: String,
    pub reference_index: usize,
    pub label: RelevanceLabel,
}

fn default_requested() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    #[serde(default = "default_requested")]
    pub references_requested: usize,
    pub models: Vec<ModelSpec>,
    pub topics: Vec<TopicSpec>,
    #[serde(default)]
    pub generations: Vec<RawGeneration>,
    #[serde(default)]
    pub relevance_labels: Vec<RelevanceRecord>,
}

/// Identity of one reference: its position in the split model output.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReferenceKey {
    pub model: String,
    pub topic: String,
    pub index: usize,
}

impl ReferenceKey {
    pub fn new(model: &str, topic: &str, index: usize) -> Self {
        ReferenceKey {
            model: model.into(),
            topic: topic.into(),
            index,
        }
    }

    pub fn id(&self) -> String {
        format!("{}::{}::{}", self.model, self.topic, self.index)
    }
}

impl core::fmt::Display for ReferenceKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}::{}::{}", self.model, self.topic, self.index)
    }
}

impl Dataset {
    pub fn model(&self, name: &str) -> Option<&ModelSpec> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn topic(&self, name: &str) -> Option<&TopicSpec> {
        self.topics.iter().find(|t| t.name == name)
    }

    /// Referential integrity and per-type invariants. Returns the number of
    /// generation cells.
    pub fn validate(&self) -> Result<usize> {
        let mut names = BTreeSet::new();
        for m in &self.models {
            m.validate()?;
            if !names.insert(m.name.as_str()) {
                return Err(Error::invalid(format!("duplicate model {}", m.name)));
            }
        }
        let mut topics = BTreeSet::new();
        for t in &self.topics {
            if !(1..=4).contains(&t.specificity_level) {
                return Err(Error::invalid(format!(
                    "topic {}: specificity_level must be 1-4",
                    t.name
                )));
            }
            if !topics.insert(t.name.as_str()) {
                return Err(Error::invalid(format!("duplicate topic {}", t.name)));
            }
        }
        let mut cells = BTreeSet::new();
        for (i, g) in self.generations.iter().enumerate() {
            let record = format!("generations[{i}]");
            if !names.contains(g.model.as_str()) {
                return Err(Error::UnknownKey {
                    kind: "model",
                    key: g.model.clone(),
                    record,
                });
            }
            if !topics.contains(g.topic.as_str()) {
                return Err(Error::UnknownKey {
                    kind: "topic",
                    key: g.topic.clone(),
                    record,
                });
            }
            if g.raw_text.trim().is_empty() && g.flag.is_none() {
                return Err(Error::invalid(format!(
                    "{record}: empty raw_text without a refusal/zero-output flag"
                )));
            }
            if !cells.insert((g.model.as_str(), g.topic.as_str())) {
                return Err(Error::invalid(format!(
                    "{record}: duplicate cell {} × {}",
                    g.model, g.topic
                )));
            }
        }
        for (i, r) in self.relevance_labels.iter().enumerate() {
            if !cells.contains(&(r.model.as_str(), r.topic.as_str())) {
                let (kind, key) = if names.contains(r.model.as_str()) {
                    ("topic", r.topic.clone())
                } else {
                    ("model", r.model.clone())
                };
                return Err(Error::UnknownKey {
                    kind,
                    key,
                    record: format!("relevance_labels[{i}]"),
                });
            }
        }
        Ok(cells.len())
    }

    /// Checks the balanced topic design: each group holds four topics at
    /// distinct specificity levels.
    pub fn validate_topic_groups(&self) -> Result<()> {
        let mut groups: BTreeMap<&str, BTreeSet<u8>> = BTreeMap::new();
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for t in &self.topics {
            groups.entry(&t.group).or_default().insert(t.specificity_level);
            *counts.entry(&t.group).or_default() += 1;
        }
        for (g, levels) in &groups {
            if counts[g] != 4 || levels.len() != 4 {
                return Err(Error::invalid(format!(
                    "topic group {g} must have 4 topics at distinct levels"
                )));
            }
        }
        Ok(())
    }

    pub fn relevance_map(&self) -> BTreeMap<ReferenceKey, RelevanceLabel> {
        self.relevance_labels
            .iter()
            .map(|r| (ReferenceKey::new(&r.model, &r.topic, r.reference_index), r.label))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Dedup

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dedup<T> {
    pub kept: Vec<T>,
    pub removed: usize,
}

/// Keeps the first item for each normalized title, preserving order.
pub fn dedup_by_title<T>(items: Vec<T>, title: impl Fn(&T) -> &str) -> Dedup<T> {
    let mut seen = BTreeSet::new();
    let before = items.len();
    let kept: Vec<T> = items
        .into_iter()
        .filter(|it| seen.insert(normalize_title(title(it))))
        .collect();
    Dedup {
        removed: before - kept.len(),
        kept,
    }
}

/// Collapses normalized-title duplicates within one model×topic cell.
pub fn dedup_cell(refs: Vec<ParsedReference>) -> Dedup<ParsedReference> {
    dedup_by_title(refs, |r| r.title.as_str())
}

// ---------------------------------------------------------------------------
// Observations

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAccounting {
    pub model: String,
    pub topic: String,
    pub n_requested: usize,
    pub n_produced: usize,
    #[serde(default)]
    pub flag: Option<CellFlag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredReference {
    pub key: ReferenceKey,
    pub authenticity: f64,
    pub relevance: Option<RelevanceLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationCell {
    pub model: String,
    pub topic: String,
    pub n_requested: usize,
    pub n_produced: usize,
    pub n_analysed: usize,
    pub authenticity_mean: f64,
    pub relevance_mean: f64,
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub cells: Vec<ObservationCell>,
    /// Cells with no analysed reference, or flagged refusal/zero-output.
    pub omitted: Vec<(String, String)>,
}

/// One cell per model×topic with at least one analysed reference; quality
/// is the mean over references of authenticity × relevance.
pub fn build_observations(
    cells: &[CellAccounting],
    refs: &[ScoredReference],
    partial_weight: f64,
) -> Result<Observations> {
    if !(0.0..=1.0).contains(&partial_weight) {
        return Err(Error::invalid("partial_weight must lie in [0, 1]"));
    }
    let missing: Vec<String> = refs
        .iter()
        .filter(|r| r.relevance.is_none())
        .map(|r| r.key.id())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingRelevance(missing));
    }

    let mut by_cell: BTreeMap<(&str, &str), Vec<&ScoredReference>> = BTreeMap::new();
    for r in refs {
        by_cell.entry((&r.key.model, &r.key.topic)).or_default().push(r);
    }

    let mut out = Observations {
        cells: Vec::new(),
        omitted: Vec::new(),
    };
    for c in cells {
        let members = by_cell.get_mut(&(c.model.as_str(), c.topic.as_str()));
        let members = match members {
            Some(m) if !m.is_empty() && c.flag.is_none() => m,
            _ => {
                out.omitted.push((c.model.clone(), c.topic.clone()));
                continue;
            }
        };
        // fixed summation order makes the result independent of input order
        members.sort_by(|a, b| {
            a.key
                .index
                .cmp(&b.key.index)
                .then(a.authenticity.total_cmp(&b.authenticity))
        });
        let n = members.len() as f64;
        let (mut auth, mut rel, mut q) = (0.0, 0.0, 0.0);
        for r in members.iter() {
            let v = relevance_value(r.relevance.unwrap(), partial_weight);
            auth += r.authenticity;
            rel += v;
            q += r.authenticity * v;
        }
        out.cells.push(ObservationCell {
            model: c.model.clone(),
            topic: c.topic.clone(),
            n_requested: c.n_requested,
            n_produced: c.n_produced,
            n_analysed: members.len(),
            authenticity_mean: auth / n,
            relevance_mean: rel / n,
            quality: (q / n).clamp(0.0, 1.0),
        });
    }
    Ok(out)
}

/// Unweighted mean of each model's cell qualities (equal topic weighting),
/// in order of first appearance.
pub fn model_quality(cells: &[ObservationCell]) -> Vec<(String, f64)> {
    let mut order: Vec<&str> = Vec::new();
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for c in cells {
        let e = acc.entry(&c.model).or_insert_with(|| {
            order.push(&c.model);
            (0.0, 0)
        });
        e.0 += c.quality;
        e.1 += 1;
    }
    order
        .into_iter()
        .map(|m| {
            let (s, n) = acc[m];
            (String::from(m), s / n as f64)
        })
        .collect()
}

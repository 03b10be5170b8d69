//! Published per-model and per-topic reference tables, embedded as CSV.

use confab_core::fitlab::SigmoidFit;
use confab_core::refdata::{Architecture, ModelSpec, TopicSpec};
use serde::Deserialize;

const TABLE_MODELS: &str = include_str!("../data/table_a1.csv");
const TABLE_TOPICS: &str = include_str!("../data/table_a2.csv");

/// Published sigmoid parameters (α, β, γ) with P in billions.
pub const SIGMOID: (f64, f64, f64) = (1.48, 0.46, -5.19);

pub fn sigmoid_fit() -> SigmoidFit {
    SigmoidFit::from_params(SIGMOID.0, SIGMOID.1, SIGMOID.2)
}

/// One model row. Parameter counts are billions; MoE rows carry active and total.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ModelRow {
    pub model: String,
    pub family: String,
    pub params: Option<f64>,
    pub total_params: Option<f64>,
    pub authenticity: f64,
    pub quality: f64,
    pub architecture: Architecture,
    pub fine_tune_of: Option<String>,
}

impl ModelRow {
    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            name: self.model.clone(),
            family: self.family.clone(),
            params: self.params,
            total_params: self.total_params,
            architecture: self.architecture,
            fine_tune_of: self.fine_tune_of.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct TopicRow {
    pub group: String,
    pub topic: String,
    pub specificity_level: u8,
    pub works_count: u64,
}

impl TopicRow {
    pub fn spec(&self) -> TopicSpec {
        TopicSpec {
            name: self.topic.clone(),
            group: self.group.clone(),
            specificity_level: self.specificity_level,
            works_count: Some(self.works_count),
        }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Vec<T> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .expect("embedded table parses")
}

/// All 38 models.
pub fn models() -> Vec<ModelRow> {
    parse(TABLE_MODELS)
}

/// The 16 dense, non-chain-of-thought models of known size.
pub fn dense_models() -> Vec<ModelRow> {
    models().into_iter().filter(|m| m.spec().is_primary_dense()).collect()
}

/// The 24 topics, 6 groups × 4 specificity levels.
pub fn topics() -> Vec<TopicRow> {
    parse(TABLE_TOPICS)
}

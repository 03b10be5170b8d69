//! Dataset loading and the split → parse → dedup ingestion step.

use std::path::Path;

use confab_core::citeparse::{parse_apa, split_reference_list, ParsedReference};
use confab_core::refdata::{dedup_by_title, CellFlag, Dataset, ReferenceKey};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};

/// Parsed and validated dataset with the SHA-256 of its file bytes.
pub fn load_dataset(path: &Path) -> AppResult<(Dataset, String)> {
    let bytes = std::fs::read(path).map_err(|e| AppError::io(path, e))?;
    let ds: Dataset =
        serde_json::from_slice(&bytes).map_err(|e| AppError::data(format!("dataset {}: {e}", path.display())))?;
    ds.validate()?;
    Ok((ds, hex::encode(Sha256::digest(&bytes))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestedReference {
    pub key: ReferenceKey,
    pub parsed: ParsedReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseFailureRecord {
    pub key: ReferenceKey,
    pub reason: String,
    pub raw: String,
}

/// Per-cell counts: requested → produced → (parse failures, duplicates) → analysed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCounts {
    pub model: String,
    pub topic: String,
    pub requested: usize,
    pub produced: usize,
    pub parse_failures: usize,
    pub duplicates: usize,
    pub analysed: usize,
    #[serde(default)]
    pub flag: Option<CellFlag>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub requested: usize,
    pub produced: usize,
    pub parse_failures: usize,
    pub duplicates: usize,
    pub analysed: usize,
}

impl Totals {
    pub fn of(cells: &[CellCounts]) -> Self {
        cells.iter().fold(Totals::default(), |t, c| Totals {
            requested: t.requested + c.requested,
            produced: t.produced + c.produced,
            parse_failures: t.parse_failures + c.parse_failures,
            duplicates: t.duplicates + c.duplicates,
            analysed: t.analysed + c.analysed,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ingested {
    pub references: Vec<IngestedReference>,
    pub failures: Vec<ParseFailureRecord>,
    pub cells: Vec<CellCounts>,
}

/// Splits, parses and deduplicates every generation in dataset order.
/// Reference indices are 1-based positions in the split list, assigned
/// before parsing and deduplication.
pub fn ingest(ds: &Dataset) -> Ingested {
    let mut out = Ingested::default();
    for g in &ds.generations {
        let mut cell = CellCounts {
            model: g.model.clone(),
            topic: g.topic.clone(),
            requested: ds.references_requested,
            produced: 0,
            parse_failures: 0,
            duplicates: 0,
            analysed: 0,
            flag: g.flag,
        };
        if g.flag.is_some() {
            out.cells.push(cell);
            continue;
        }
        let lines = split_reference_list(&g.raw_text);
        cell.produced = lines.len();
        let mut parsed = Vec::new();
        for (i, raw) in lines.iter().enumerate() {
            let key = ReferenceKey::new(&g.model, &g.topic, i + 1);
            match parse_apa(raw) {
                Ok(p) => parsed.push(IngestedReference { key, parsed: p }),
                Err(f) => {
                    cell.parse_failures += 1;
                    out.failures.push(ParseFailureRecord {
                        key,
                        reason: f.reason,
                        raw: f.raw,
                    });
                }
            }
        }
        let d = dedup_by_title(parsed, |r| r.parsed.title.as_str());
        cell.duplicates = d.removed;
        cell.analysed = d.kept.len();
        out.references.extend(d.kept);
        out.cells.push(cell);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use confab_core::refdata::{Architecture, ModelSpec, RawGeneration, TopicSpec};

    fn dataset(text: &str) -> Dataset {
        Dataset {
            references_requested: 10,
            models: vec![ModelSpec {
                name: "m".into(),
                family: "f".into(),
                params: Some(8.0),
                total_params: None,
                architecture: Architecture::Dense,
                fine_tune_of: None,
            }],
            topics: vec![
                TopicSpec {
                    name: "t".into(),
                    group: "g".into(),
                    specificity_level: 1,
                    works_count: Some(10),
                },
                TopicSpec {
                    name: "u".into(),
                    group: "g".into(),
                    specificity_level: 2,
                    works_count: Some(10),
                },
            ],
            generations: vec![
                RawGeneration {
                    model: "m".into(),
                    topic: "t".into(),
                    raw_text: text.into(),
                    flag: None,
                },
                RawGeneration {
                    model: "m".into(),
                    topic: "u".into(),
                    raw_text: String::new(),
                    flag: Some(CellFlag::Refusal),
                },
            ],
            relevance_labels: vec![],
        }
    }

    #[test]
    fn accounting_adds_up() {
        let text = "Here are references:\n\
            1. Dahl, R. A. (1971). Polyarchy: Participation and opposition. Yale University Press.\n\
            2. (2020). Untitled.\n\
            3. Dahl, R. (1971). Polyarchy: participation and opposition. Yale.\n\
            4. Sen, A. (1999). Development as freedom. Knopf.";
        let ing = ingest(&dataset(text));
        let t = Totals::of(&ing.cells);
        assert_eq!(
            t,
            Totals {
                requested: 20,
                produced: 4,
                parse_failures: 1,
                duplicates: 1,
                analysed: 2
            }
        );
        assert_eq!(t.produced - t.parse_failures - t.duplicates, t.analysed);
        let idx: Vec<usize> = ing.references.iter().map(|r| r.key.index).collect();
        assert_eq!(idx, vec![1, 4]);
        assert_eq!(ing.failures[0].key.index, 2);
        assert_eq!(ing.cells[1].flag, Some(CellFlag::Refusal));
    }
}

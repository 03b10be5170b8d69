//! Stamped artifact writing and reading.
//!
//! CSV and text files open with `# key=value` comment lines; JSON objects
//! carry a `stamp` member; JSON-lines files start with a stamp line.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{AppError, AppResult};
use crate::openalex::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stamp {
    pub seed: u64,
    pub config_hash: String,
    /// Present only on files whose content depends on the PARTIAL weight.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial_weight: Option<f64>,
}

impl Stamp {
    fn comment_lines(&self) -> String {
        let mut s = format!("# seed={}\n# config_hash={}\n", self.seed, self.config_hash);
        if let Some(w) = self.partial_weight {
            s.push_str(&format!("# partial_weight={w}\n"));
        }
        s
    }
}

/// Whether a file's bytes depend on the PARTIAL relevance weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dependence {
    Independent,
    Relevance,
}

/// The output directory of one run.
#[derive(Debug, Clone)]
pub struct Bundle {
    dir: PathBuf,
    seed: u64,
    config_hash: String,
    partial_weight: f64,
}

/// Floats print in shortest round-trip form; NaN becomes an empty cell.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

impl Bundle {
    pub fn new(dir: impl Into<PathBuf>, seed: u64, config_hash: String, partial_weight: f64) -> Self {
        Bundle {
            dir: dir.into(),
            seed,
            config_hash,
            partial_weight,
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn stamp(&self, dep: Dependence) -> Stamp {
        Stamp {
            seed: self.seed,
            config_hash: self.config_hash.clone(),
            partial_weight: (dep == Dependence::Relevance).then_some(self.partial_weight),
        }
    }

    fn write(&self, name: &str, bytes: &[u8]) -> AppResult<PathBuf> {
        let path = self.path(name);
        write_atomic(&path, bytes).map_err(|e| AppError::io(&path, e))?;
        Ok(path)
    }

    pub fn write_csv(&self, name: &str, dep: Dependence, header: &[&str], rows: &[Vec<String>]) -> AppResult<PathBuf> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let err = |e: csv::Error| AppError::data(format!("{name}: {e}"));
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.write_record(r).map_err(err)?;
        }
        let body = w.into_inner().map_err(|e| AppError::data(format!("{name}: {e}")))?;
        let mut bytes = self.stamp(dep).comment_lines().into_bytes();
        bytes.extend_from_slice(&body);
        self.write(name, &bytes)
    }

    /// Writes `value` (which must serialize to an object) with a `stamp` member.
    pub fn write_json<T: Serialize>(&self, name: &str, dep: Dependence, value: &T) -> AppResult<PathBuf> {
        let mut v = serde_json::to_value(value).map_err(|e| AppError::data(format!("{name}: {e}")))?;
        let Value::Object(map) = &mut v else {
            return Err(AppError::data(format!("{name}: report is not a JSON object")));
        };
        map.insert("stamp".into(), json!(self.stamp(dep)));
        let mut bytes = serde_json::to_vec_pretty(&v).map_err(|e| AppError::data(format!("{name}: {e}")))?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn write_jsonl<T: Serialize>(&self, name: &str, dep: Dependence, items: &[T]) -> AppResult<PathBuf> {
        let mut bytes = serde_json::to_vec(&json!({ "stamp": self.stamp(dep) })).expect("stamp serializes");
        bytes.push(b'\n');
        for it in items {
            serde_json::to_writer(&mut bytes, it).map_err(|e| AppError::data(format!("{name}: {e}")))?;
            bytes.push(b'\n');
        }
        self.write(name, &bytes)
    }

    pub fn write_text(&self, name: &str, dep: Dependence, text: &str) -> AppResult<PathBuf> {
        let mut s = self.stamp(dep).comment_lines();
        s.push_str(text);
        self.write(name, s.as_bytes())
    }

    /// Errors listing every name in `names` absent from the bundle.
    pub fn require(&self, names: &[&str]) -> AppResult<()> {
        let missing: Vec<PathBuf> = names.iter().map(|n| self.path(n)).filter(|p| !p.is_file()).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(AppError::MissingArtifacts(missing))
        }
    }
}

/// Header and rows of a stamped (or plain) CSV file; `#` lines are skipped.
pub fn read_csv(path: &Path) -> AppResult<(Vec<String>, Vec<Vec<String>>)> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let err = |e: csv::Error| AppError::data(format!("{}: {e}", path.display()));
    let header = r.headers().map_err(err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(err)?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// Records of a JSON-lines file, skipping stamp lines and blank lines.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> AppResult<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with("{\"stamp\":") {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| AppError::data(format!("{}:{}: {e}", path.display(), i + 1)))?);
    }
    Ok(out)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> AppResult<T> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| AppError::data(format!("{}: {e}", path.display())))
}

/// Column index by name.
pub fn column(header: &[String], name: &str, path: &Path) -> AppResult<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| AppError::data(format!("{}: missing column `{name}`", path.display())))
}
